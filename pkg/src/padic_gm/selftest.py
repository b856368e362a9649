"""Invariant suites behind ``padic-gm selftest``: one small, exact check per
property, grouped by module, printed as a pass/fail matrix with timings."""

from __future__ import annotations

import random
import time
import traceback
from typing import Callable

from .padic import PadicCtx, PadicElem


def _padic_core(fast: bool):
    from .padic import divide_exact, hensel_root, teichmuller

    def inverse():
        x = PadicElem.from_int(2, 5, 3)
        return x.invert().residue == 63 and (x * x.invert()).residue == 1

    def valuation_ledger():
        q = divide_exact(PadicElem.from_int(25, 5, 4), 5)
        return q.residue == 5 and q.prec == 3

    def hensel():
        r = hensel_root([-2, 0, 1], 3, PadicCtx(7, 6))  # sqrt(2) in Z_7
        return (r * r).residue == 2

    def teich():
        ctx = PadicCtx(5, 6)
        w = teichmuller(2, ctx)
        return (w**4).residue == 1 and w.residue % 5 == 2

    return [("inverse", inverse), ("valuation ledger", valuation_ledger), ("hensel", hensel),
            ("teichmuller", teich)]


def _mahler(fast: bool):
    from .mahler import LocAnChar, eval_mahler, mahler_of_polynomial, nu_exponent, rho_bruteforce

    def nu_table():
        n_max = 4 if fast else 5
        return all(nu_exponent(n, m, p) == rho_bruteforce(n, m, p)
                   for p in (2, 3, 5) for n in range(1, n_max + 1) for m in range(n + 1)
                   if p**n <= 3125)

    def nu_recurrence():
        return all(nu_exponent(n, m + 1, p) - nu_exponent(n, m, p) == p ** (n - m - 1)
                   for p in (2, 3, 5) for n in range(1, 7) for m in range(n))

    def polynomial_eval():
        ctx = PadicCtx(5, 8)
        f = mahler_of_polynomial([1, 0, 3, 1], ctx)
        x = PadicElem.from_int(1234, 5, 8)
        return eval_mahler(f, x).residue == (1 + 3 * 1234**2 + 1234**3) % 5**8

    def char_multiplicative():
        ctx = PadicCtx(7, 6)
        chi = LocAnChar(2, 5, ctx)
        rng = random.Random(1)
        for _ in range(10 if fast else 50):
            a, b = rng.randrange(1, 7**6), rng.randrange(1, 7**6)
            if a % 7 == 0 or b % 7 == 0:
                continue
            if (chi(a) * chi(b)).residue != chi(a * b).residue:
                return False
        return True

    return [("nu = rho", nu_table), ("nu recurrence", nu_recurrence), ("polynomial eval", polynomial_eval),
            ("character multiplicative", char_multiplicative)]


def _operator_interp(fast: bool):
    from .nilpotent import (
        BaseRing,
        NilpotentElem,
        falling_factorial_apply,
        lemma_formula_rhs,
        lm_generators,
        nabla_theta,
        operator_norm_table,
    )

    def lemma_oracle():
        rng = random.Random(2)
        kmax = 4 if fast else 6
        for p in (3, 5):
            ring = BaseRing(p, 8, 8)
            for a in range(3):
                for b in range(3 - a):
                    for c in range(3 - a - b):
                        s = ring.random(rng)
                        v = NilpotentElem.from_xyz(s, a, b, c, 1, a + b + c)
                        for k in range(1, kmax + 1):
                            lhs = falling_factorial_apply(nabla_theta, k, v)
                            rhs = lemma_formula_rhs(s, a, b, c, k, 1, a + b + c)
                            if lhs != rhs:
                                return False
        return True

    def integrality():
        ring = BaseRing(3, 6, 5)
        gens = lm_generators(ring, 1, 2)
        return all(nabla_theta(g).norm_exponent() is None or nabla_theta(g).norm_exponent() <= 0 for g in gens)

    def norms_stable_in_m():
        ring = BaseRing(3, 6, 4)
        K = 5 if fast else 7
        t1 = operator_norm_table(nabla_theta, lm_generators(ring, 1, 2), K).norms
        t2 = operator_norm_table(nabla_theta, lm_generators(ring, 2, 2), K).norms
        return t1 == t2

    return [("lemma formula oracle", lemma_oracle), ("nabla integral", integrality),
            ("norm table m-independent", norms_stable_in_m)]


def _qexp(fast: bool):
    from .qexp import QExpansion, cont_action, delta, deplete, eisenstein, indicator_units, up_operator, v_operator

    def random_series(p, M, Q, rng):
        return QExpansion([rng.randrange(p**M) for _ in range(Q)], p, M)

    def commutation():
        rng = random.Random(3)
        for p in (2, 3, 5, 11):
            for _ in range(5 if fast else 20):
                f = random_series(p, 6, 6 * p, rng)
                table = [rng.randrange(p**6) for _ in range(6 * p * p + 1)]

                def phi(n, t=table):
                    return t[n]

                def phi_p(n, t=table, p=p):
                    return t[p * n]

                if up_operator(cont_action(phi, f)) != cont_action(phi_p, up_operator(f)):
                    return False
                g = v_operator(f)
                if cont_action(phi, g) != v_operator(cont_action(phi_p, f)).truncate(g.Q):
                    return False
                dep = deplete(f)
                if dep != cont_action(indicator_units(p), f) or deplete(dep) != dep:
                    return False
                if dep != (f - v_operator(up_operator(f), f.Q)):
                    return False
        return True

    def eisenstein_products():
        ctx = PadicCtx(7, 8)
        return eisenstein(4, ctx, 30) * eisenstein(4, ctx, 30) == eisenstein(8, ctx, 30)

    def tau():
        d = delta(PadicCtx(691, 3), 12)
        return d.coeffs[2] == (-24) % 691**3 and d.coeffs[3] == 252

    return [("U/phi/V/depletion laws", commutation), ("E4^2 = E8", eisenstein_products), ("tau(2), tau(3)", tau)]


def _nearly(fast: bool):
    from .nearly import FilteredForm, graded_factor_table, nabla_vector, oc_projection, projector_poles, restriction
    from .qexp import QExpansion, eisenstein, theta

    def intertwining():
        rng = random.Random(4)
        for _ in range(10 if fast else 40):
            r = rng.randrange(3)
            k = rng.randrange(0, 20)
            F = FilteredForm(k, tuple(QExpansion([rng.randrange(5**6) for _ in range(15)], 5, 6)
                                      for _ in range(r + 1)))
            if restriction(nabla_vector(F)) != theta(restriction(F)):
                return False
            if nabla_vector(F).r != F.r + 1:
                return False
        return True

    def kills_nabla_images():
        g = eisenstein(6, PadicCtx(7, 6), 20)
        return oc_projection(nabla_vector(FilteredForm.embed(g, 6))).valuation() >= 6

    def factor_table():
        return all(graded_factor_table(k, 4).factors == tuple(k - j + 1 for j in range(1, 5)) for k in range(-4, 31))

    def pole_locus():
        zero = QExpansion([0] * 8, 5, 4)
        for k in range(-2, 31):
            F = FilteredForm(k, (zero, zero, zero))
            try:
                oc_projection(F)
                erred = False
            except Exception:
                erred = True
            if erred != bool(projector_poles(k, 2)):
                return False
        return True

    return [("restriction intertwines", intertwining), ("kills nabla-images", kills_nabla_images),
            ("graded factor c_j", factor_table), ("pole locus", pole_locus)]


def _lfun(fast: bool):
    from .lfun import (
        EigenformData,
        get_projector,
        level1_eigenforms,
        ordinary_project,
        triple_product_value,
        eigenform_data,
        up_matrix,
    )
    from .qexp import delta, eisenstein, v_operator

    def one_dim_up():
        data = up_matrix(5, 4, 1, 5, 8)
        return data.charseries[0] == 1 and data.A[0][0] % 5**8 == 1

    def projector():
        p, k, d, M = 5, 12, 8, 6
        ctx = PadicCtx(p, M)
        proj = get_projector(p, k, d, p * d, M)
        E = eisenstein(k, ctx, p * p * d)
        one = PadicElem.from_int(1, p, M)
        Ed = EigenformData(E, k, one, one, one, PadicElem.exact_power(p, k - 1, M))
        Ea = Ed.stabilized()
        fixed = ordinary_project(Ea, proj).form.congruent(Ea.truncate(p * d), M)
        killed = ordinary_project(E - v_operator(E), proj).form.valuation() >= M
        return fixed and killed

    def anchor():
        p, M = 13, 4 if fast else 6
        ctx = PadicCtx(p, M)
        from .lfun import katz_plan

        Q = katz_plan(p, 24, M) * p * p
        efs = level1_eigenforms(24, ctx, Q)
        f = next(e for e in efs if e.ordinary)
        other = next(e for e in efs if e is not f)
        D = eigenform_data(delta(ctx, Q))
        r = triple_product_value(f, D, D)
        ef = r.euler
        expected = ef.E / (ef.E0 * ef.E1) / (f.f[2] - other.f[2])
        return r.routes_agree and (r.value - expected).valuation >= r.certified

    return [("1-dim U matrix", one_dim_up), ("e_ord fixes/kills", projector), ("t=0 anchor", anchor)]


SUITES: dict[str, Callable] = {
    "padic-core": _padic_core,
    "mahler": _mahler,
    "operator-interp": _operator_interp,
    "qexp": _qexp,
    "nearly-oc": _nearly,
    "padic-lfun": _lfun,
}


def run_selftest(out, module: str | None = None, fast: bool = False) -> int:
    names = list(SUITES)
    if module:
        key = module.replace("_", "-")
        if key not in SUITES:
            out.write(f"unknown module {module}; choose from {', '.join(names)}\n")
            return 1
        names = [key]
    failures = 0
    for name in names:
        for label, check in SUITES[name](fast):
            t0 = time.perf_counter()
            try:
                ok = bool(check())
                note = ""
            except Exception as exc:  # reported as a failure row
                ok, note = False, f" ({type(exc).__name__}: {exc})"
                traceback.print_exc()
            dt = time.perf_counter() - t0
            failures += not ok
            out.write(f"{name:16s} {label:28s} {'PASS' if ok else 'FAIL'} {dt:7.2f}s{note}\n")
    out.write(f"summary failures={failures}\n")
    return 0 if failures == 0 else 1
