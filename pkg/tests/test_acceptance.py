"""End-to-end acceptance checks, one per criterion, each with its runtime budget.

Run directly (``python tests/test_acceptance.py``) for the pass/fail table, or
under pytest, where the same table is printed in the terminal summary.
"""

from __future__ import annotations

import random
import sys
import time
from fractions import Fraction

import pytest

from padic_gm.lfun import (
    EigenformData,
    ValuePlan,
    eigenform_data,
    eisenstein_data,
    get_projector,
    katz_plan,
    level1_eigenforms,
    ordinary_project,
    rankin_value,
    rankin_value_iterated,
    triple_product_value,
    up_matrix,
)
from padic_gm.mahler import LocAnChar, nu_exponent, rho_bruteforce
from padic_gm.nilpotent import (
    BaseRing,
    NilpotentElem,
    falling_factorial_apply,
    lemma_formula_rhs,
    lm_generators,
    monomials,
    nabla_theta,
    operator_norm_table,
    perturbation_check,
    random_nilpotent,
    z_swap_operator,
)
from padic_gm.padic import PadicCtx, PadicElem
from padic_gm.qexp import (
    QExpansion,
    cont_action,
    delta,
    deplete,
    eisenstein,
    indicator_units,
    nabla_chi,
    theta_power,
    up_operator,
    v_operator,
)

RESULTS: dict[int, str] = {}


def _record(n: int, ok: bool, elapsed: float, budget: float, note: str = "") -> bool:
    ok_time = elapsed < budget
    status = "PASS" if ok and ok_time else "FAIL"
    extra = f" {note}" if note else ""
    line = f"criterion {n:2d}: {status}  ({elapsed:6.2f}s of {budget:g}s){extra}"
    RESULTS[n] = line
    print(line)
    return ok and ok_time


# --- 1 ----------------------------------------------------------------------------


def criterion_1() -> bool:
    t0 = time.perf_counter()
    ok = True
    for p in (2, 3, 5):
        for n in range(1, 7):
            for m in range(n + 1):
                ok &= nu_exponent(n, m, p) == rho_bruteforce(n, m, p)
                if m < n:
                    ok &= nu_exponent(n, m + 1, p) - nu_exponent(n, m, p) == p ** (n - m - 1)
    return _record(1, ok, time.perf_counter() - t0, 1)


# --- 2 ----------------------------------------------------------------------------


def criterion_2() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(20)
    ok, checked = True, 0
    for p in (3, 5):
        ring = BaseRing(p, 8, 16)
        for trial in range(25):
            s = ring.random(rng)
            m = 1 + trial % 2
            for a, b, c in monomials(4):
                v = NilpotentElem.from_xyz(s, a, b, c, m, 4)
                for k in range(9):
                    lhs = falling_factorial_apply(nabla_theta, k, v)
                    rhs = lemma_formula_rhs(s, a, b, c, k, m, 4)
                    ok &= lhs == rhs
                    checked += 1
    return _record(2, ok, time.perf_counter() - t0, 60, f"[{checked} identities]")


# --- 3 ----------------------------------------------------------------------------


def criterion_3() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(30)
    ok = True
    M = 6
    for p in (2, 3, 5, 11):
        Q = 4 * p + 3
        for _ in range(100):
            f = QExpansion([rng.randrange(p**M) for _ in range(Q)], p, M)
            table = [rng.randrange(p**M) for _ in range(p * Q * p + 1)]

            def phi(n, t=table):
                return t[n]

            def phi_p(n, t=table, p=p):
                return t[p * n]

            ok &= up_operator(cont_action(phi, f)) == cont_action(phi_p, up_operator(f))
            g = v_operator(f)
            ok &= cont_action(phi, g) == v_operator(cont_action(phi_p, f)).truncate(g.Q)
            dep = deplete(f)
            ok &= dep == f - v_operator(up_operator(f), f.Q)
            ok &= dep == cont_action(indicator_units(p), f)
            ok &= deplete(dep) == dep
    return _record(3, ok, time.perf_counter() - t0, 10)


# --- 4 ----------------------------------------------------------------------------


def criterion_4() -> bool:
    t0 = time.perf_counter()
    p, M, Q = 11, 6, 200
    ctx = PadicCtx(p, M)
    f = deplete(delta(ctx, Q))
    ok = True
    for t in (0, 1, 2):
        chi_f = nabla_chi(LocAnChar.power(t, ctx), f)
        for i in range(5):
            lhs = theta_power(f, t + (p - 1) * p**i)
            ok &= lhs.congruent(chi_f, i + 1)
    return _record(4, ok, time.perf_counter() - t0, 10)


# --- 5 ----------------------------------------------------------------------------


def criterion_5() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(50)
    ok = True
    for p in (3, 5):
        ring = BaseRing(p, 10, 6)
        for m in (1, 2, 3):
            gens = lm_generators(ring, m, 3)
            for g in gens:
                e = nabla_theta(g).norm_exponent()
                ok &= e is None or e <= 0
            for _ in range(20):
                v = random_nilpotent(ring, m, 3, rng)
                e = nabla_theta(v).norm_exponent()
                ok &= e is None or e <= 0
            if m < 3:
                t_m = operator_norm_table(nabla_theta, gens, 9).norms
                t_next = operator_norm_table(nabla_theta, lm_generators(ring, m + 1, 3), 9).norms
                ok &= t_m == t_next
    return _record(5, ok, time.perf_counter() - t0, 30)


# --- 6 ----------------------------------------------------------------------------


def criterion_6() -> bool:
    t0 = time.perf_counter()
    p, eps, K = 5, Fraction(1, 10), 41
    ring = BaseRing(p, 20, 8)
    gens = lm_generators(ring, 1, 1)
    gauge = operator_norm_table(nabla_theta, gens, K)
    rng = random.Random(60)
    swap = z_swap_operator(2)
    ok = True
    for _ in range(10):
        r, c = ring.random(rng), rng.randrange(ring.modulus)
        rep = perturbation_check(nabla_theta, lambda v, r=r, c=c: v * r + swap(v).scale(c), gens, eps,
                                 None, K, p, gauge)
        ok &= rep.passed and rep.N == rep.threshold_N
    # 2 is not a square mod 5: nabla + swap has eigenvalues outside Z_5
    fixture = perturbation_check(nabla_theta, swap, gens, eps, 0, K, p, gauge)
    ok &= not fixture.passed
    note = f"[threshold N={rep.N}, log_p C={gauge.sup(eps / 2)}, N=0 fixture fails]"
    return _record(6, ok, time.perf_counter() - t0, 60, note)


# --- 7 ----------------------------------------------------------------------------


def _eisenstein_stabilizations(p, k, M, Q):
    ctx = PadicCtx(p, M)
    E = eisenstein(k, ctx, Q)
    one = PadicElem.from_int(1, p, M)
    data = EigenformData(E, k, PadicElem.from_int(1 + p ** (k - 1), p, M), one, one,
                         PadicElem.exact_power(p, k - 1, M))
    return data.stabilized(), E - v_operator(E)


def criterion_7() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(70)
    ok = True
    for p, k, d, M in [(5, 4, 8, 8), (5, 12, 10, 8), (5, 24, 12, 8), (11, 12, 10, 6), (11, 24, 12, 6)]:
        Qb = p * d
        proj = get_projector(p, k, d, Qb, M)
        unit, beta = _eisenstein_stabilizations(p, k, M, p * Qb)
        fixed = ordinary_project(unit, proj)
        killed = ordinary_project(beta, proj)
        ok &= fixed.certified >= 1 and fixed.form.congruent(unit.truncate(Qb), fixed.certified)
        ok &= killed.form.valuation() >= killed.certified >= 1
        basis = proj.data.basis
        mod = p**M
        for _ in range(20):
            ys = [rng.randrange(mod) for _ in range(d)]
            coeffs = [sum(y * e.coeffs[n] for y, e in zip(ys, basis)) % mod for n in range(Qb)]
            F = QExpansion(coeffs, p, M, weight=k)
            once = ordinary_project(F, proj, pre_up=0)
            twice = ordinary_project(once.form, proj, pre_up=0)
            ok &= twice.form.congruent(once.form, min(once.certified, twice.certified))
    return _record(7, ok, time.perf_counter() - t0, 120)


# --- 8 ----------------------------------------------------------------------------


def criterion_8() -> bool:
    t0 = time.perf_counter()
    p, M = 5, 8
    ok, compared = True, 0
    for k in (0, 12):
        for d in (4, 6, 8):
            Q = p * d
            a = up_matrix(p, k, d, Q, M)
            b = up_matrix(p, k, d + 2, 2 * Q, M + 2)
            ok &= a.charseries[0] == 1 and b.charseries[0] == 1
            for n in range(1, d + 1):
                digits = min(a.char_certified[n], b.char_certified[n])
                if digits > 0:
                    compared += 1
                    ok &= (a.charseries[n] - b.charseries[n]) % p**digits == 0
    ok &= compared > 0
    return _record(8, ok, time.perf_counter() - t0, 300, f"[{compared} certified coefficients]")


# --- 9 ----------------------------------------------------------------------------


def criterion_9() -> bool:
    t0 = time.perf_counter()
    p, M = 13, 6
    ctx = PadicCtx(p, M)
    Q = katz_plan(p, 24, M) * p * p
    forms = level1_eigenforms(24, ctx, Q)
    f = next(e for e in forms if e.ordinary)
    other = next(e for e in forms if e is not f)
    D = eigenform_data(delta(ctx, Q))
    r = triple_product_value(f, D, D)
    # Delta^2 = c f + c' f' with c = (a_2(Delta^2) - a_2(f')) / (a_2(f) - a_2(f')) = 1/(a_2(f) - a_2(f'))
    ef = r.euler
    expected = ef.E / (ef.E0 * ef.E1) / (f.f[2] - other.f[2])
    ok = r.t == 0 and r.certified >= 1 and (r.value - expected).valuation >= r.certified
    ok &= r.routes_agree
    note = f"[p=13, value={r.value.residue}, certified={r.certified}]"
    return _record(9, ok, time.perf_counter() - t0, 600, note)


# --- 10 ---------------------------------------------------------------------------


def criterion_10() -> bool:
    t0 = time.perf_counter()
    ok = True
    # route independence on triple products (t = 1) and Rankin values at p = 11
    p, M = 11, 5
    ctx = PadicCtx(p, M)
    Q = katz_plan(p, 12, M) * p * p
    f = eigenform_data(delta(ctx, Q))
    g = eisenstein_data(4, ctx, Q)
    for route in ("rc", "nearly"):
        r = triple_product_value(f, g, g, ValuePlan(M=M, route=route))
        ok &= r.routes_agree and r.t == 2
    base = {}
    for k2 in (4, 6):
        r = rankin_value(f, k2, g)
        ok &= r.routes_agree
        base[k2] = r
    # k2-congruence through direct U-iteration of the same product; U^e already
    # lands in the ordinary span mod p^e (certified by the fit residual), and
    # U^{e+1} is used as a cross-check where it is cheap
    f6 = eigenform_data(delta(PadicCtx(p, 6), 200))
    for k2, t in ((6, 1), (4, 2)):
        for i in range(4):
            e = i + 1
            lo = rankin_value_iterated(f6, k2, 4, t, e, N=e)
            hi = rankin_value_iterated(f6, k2 + (p - 1) * p**i, 4, t, e, N=e)
            hi_chi = rankin_value_iterated(f6, k2 + (p - 1) * p**i, 4, t, e, N=e, route="chi")
            ok &= min(lo.certified, hi.certified, hi_chi.certified) >= e
            ok &= lo.value == hi.value == hi_chi.value
            if e <= 3:
                ok &= lo.value == rankin_value_iterated(f6, k2, 4, t, e, N=e + 1).value
                ok &= lo.value == base[k2].value.residue % p**e
    return _record(10, ok, time.perf_counter() - t0, 600)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
