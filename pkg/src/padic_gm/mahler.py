"""Mahler expansions on Z_p, growth gauges, locally analytic characters and
the norm exponents nu_{n,m}."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import NotAUnit, PrecisionExhausted
from .padic import PadicCtx, PadicElem, divide_exact, teichmuller, vp, vp_factorial


@dataclass(frozen=True)
class MahlerSeries:
    """f(x) = sum_k coeffs[k] * C(x, k), truncated at K = len(coeffs).

    ``tail_valuation`` is a lower bound for v(a_k), k >= K, when known
    (``math.inf`` for polynomials of degree < K, ``None`` when unknown).
    """

    coeffs: tuple
    ctx: PadicCtx
    tail_valuation: float | None = None

    @property
    def K(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class GrowthGauge:
    eps: Fraction
    sup_exponent: Fraction | None  # sup = p**sup_exponent; None for the zero series
    argmax: int | None
    p: int

    @property
    def sup(self) -> Fraction:
        if self.sup_exponent is None:
            return Fraction(0)
        e = self.sup_exponent
        # only rational powers with integral exponent are representable exactly
        if e.denominator == 1:
            return Fraction(self.p) ** int(e)
        raise ValueError("sup is an irrational real; use sup_exponent")


def _as_elem(v, ctx: PadicCtx) -> PadicElem:
    if isinstance(v, PadicElem):
        return v
    return PadicElem.from_rational(v, ctx.p, ctx.M)


def finite_difference_coeffs(values: Sequence, ctx: PadicCtx, tail_valuation=None) -> MahlerSeries:
    """a_k = (Delta^k f)(0) from samples f(0..K-1)."""
    if not values:
        raise ValueError("need at least one sample")
    row = [_as_elem(v, ctx) for v in values]
    coeffs = []
    while row:
        coeffs.append(row[0])
        row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
    return MahlerSeries(tuple(coeffs), ctx, tail_valuation)


def mahler_of_polynomial(poly: Sequence[int], ctx: PadicCtx, K: int | None = None) -> MahlerSeries:
    """Mahler series of sum poly[i] x^i; exact (infinite tail valuation)."""
    deg = len(poly) - 1
    K = max(K or 0, deg + 1)
    vals = []
    for x in range(K):
        vals.append(sum(c * x**i for i, c in enumerate(poly)))
    return finite_difference_coeffs(vals, ctx, tail_valuation=math.inf)


def binomial(x, k: int, ctx: PadicCtx) -> PadicElem:
    """C(x, k) for x an integer or an integral PadicElem."""
    if isinstance(x, int):
        if x >= 0:
            return PadicElem.from_int(math.comb(x, k), ctx.p, ctx.M)
        return PadicElem.from_int((-1) ** k * math.comb(k - x - 1, k), ctx.p, ctx.M)
    num = PadicElem.from_int(1, x.p, x.prec)
    for i in range(k):
        num = num * (x - i)
    # num is divisible by k! in Z_p; divide out the p-part losing those digits
    out = divide_exact(num, math.factorial(k))
    return out


def eval_mahler(f: MahlerSeries, x, target_prec: int | None = None) -> PadicElem:
    """Evaluate the truncated series, refusing to return uncertified digits."""
    ctx = f.ctx
    target = ctx.M if target_prec is None else target_prec
    exact_int = isinstance(x, int) and 0 <= x < f.K
    if not exact_int:
        if f.tail_valuation is None:
            raise PrecisionExhausted(
                "tail of the Mahler series is not bounded; supply tail_valuation"
            )
        if f.tail_valuation < target:
            raise PrecisionExhausted(
                f"tail bound {f.tail_valuation} below target precision {target}"
            )
    if isinstance(x, PadicElem) and x.val < 0:
        raise ValueError("Mahler series are evaluated on Z_p")
    acc = PadicElem.from_int(0, ctx.p, ctx.M + 64)
    stop = min(f.K, x + 1) if exact_int else f.K
    for k in range(stop):
        a = f.coeffs[k]
        if a.is_zero() and a.prec >= target:
            continue
        acc = acc + a * binomial(x, k, ctx)
    if acc.prec < target:
        raise PrecisionExhausted(f"only {acc.prec} digits certified, {target} requested")
    return acc.with_prec(target)


def growth_sup(f: MahlerSeries, eps) -> GrowthGauge:
    """max_k p^{k eps} |a_k| over the stored coefficients.

    Coefficients that vanish at working precision are skipped.
    """
    eps = Fraction(eps)
    best, arg = None, None
    for k, a in enumerate(f.coeffs):
        if a.is_zero():
            continue
        e = k * eps - a.val
        if best is None or e > best:
            best, arg = e, k
    return GrowthGauge(eps, best, arg, f.ctx.p)


# --- characters ---------------------------------------------------------------


def _omega(n: int, p: int, M: int) -> int:
    if p == 2:
        return 1 if n % 4 == 1 else -1
    return teichmuller(n, PadicCtx(p, M)).residue


def _binomial_series_pow(u: int, s: int, p: int, M: int) -> int:
    """(1+u)^s mod p^M for v(u) >= 1 (>= 2 if p = 2), s in Z (or a lift of Z_p)."""
    # term j has valuation >= j*v(u) - v_p(j!)
    vu = vp(u, p) if u else M
    if u == 0:
        return 1 % p**M
    # j*vu - v_p(j!) >= j*(vu - 1/(p-1)) >= M beyond J
    J = math.ceil(Fraction(M) / (vu - Fraction(1, p - 1))) + 1
    extra = vp_factorial(J, p)
    mod = p ** (M + extra)
    total = 0
    falling = 1
    upow = 1
    fact = 1
    for j in range(J):
        if j:
            falling = falling * (s - j + 1) % mod
            upow = upow * u % mod
            fact *= j
        num = falling * upow % mod
        e = vp_factorial(j, p)
        unit = fact // p**e
        # num is divisible by p^e (C(s, j) is integral)
        term = (num // p**e) * pow(unit, -1, p**M)
        total += term
    return total % p**M


@dataclass(frozen=True)
class LocAnChar:
    """chi(x) = omega(x)^tame * <x>^wild on Z_p^x."""

    tame: int
    wild: int  # a lift of the wild exponent s in Z_p (integers suffice mod p^M)
    ctx: PadicCtx

    @classmethod
    def power(cls, t: int, ctx: PadicCtx) -> "LocAnChar":
        """The algebraic character x -> x^t."""
        return cls(t % _tame_modulus(ctx.p), t, ctx)

    def integer_exponent(self):
        """t if chi is x -> x^t, else None."""
        if self.tame % _tame_modulus(self.ctx.p) == self.wild % _tame_modulus(self.ctx.p):
            return self.wild
        return None

    def __call__(self, n) -> PadicElem:
        return char_eval(self, n)


def _tame_modulus(p: int) -> int:
    return 2 if p == 2 else p - 1


def char_eval(chi: LocAnChar, n) -> PadicElem:
    p, M = chi.ctx.p, chi.ctx.M
    if isinstance(n, PadicElem):
        if not n.is_unit():
            raise NotAUnit(f"{n!r} is not a unit")
        n = n.residue
    if n % p == 0:
        raise NotAUnit(f"{n} is divisible by {p}")
    mod = p**M
    w = _omega(n, p, M) % mod
    br = n % mod * pow(w, -1, mod) % mod  # <n> = n / omega(n)
    u = (br - 1) % mod
    wild = _binomial_series_pow(u, chi.wild, p, M)
    tame = pow(w, chi.tame % _tame_modulus(p), mod)
    return PadicElem.from_int(tame * wild % mod, p, M)


def restricted_char(chi: LocAnChar) -> Callable[[int], PadicElem]:
    """n -> chi(n) on units, 0 on p Z_p (extension by zero)."""
    p, M = chi.ctx.p, chi.ctx.M
    zero = PadicElem.from_int(0, p, M)

    def oracle(n: int) -> PadicElem:
        if n % p == 0:
            return zero
        return char_eval(chi, n)

    return oracle


# --- nu_{n,m} -------------------------------------------------------------------


def nu_exponent(n: int, m: int, p: int) -> int:
    """Closed form m p^{n-m} + sum_{k=1}^{m-1} k (p-1) p^{n-k-1}."""
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    return m * p ** (n - m) + sum(k * (p - 1) * p ** (n - k - 1) for k in range(1, m))


def rho_bruteforce(n: int, m: int, p: int) -> int:
    """-log_p of p^{-m p^{n-m}} prod_{x in (Z/p^n)^x, x != 1 mod p^m} |x-1|_p."""
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    total = m * p ** (n - m)
    pm = p**m
    for x in range(1, p**n):
        if x % p == 0 or (x - 1) % pm == 0:
            continue
        total += vp(x - 1, p)
    return total


def lemma_inequality_check(T: int, n: int, m: int, p: int, prec: int | None = None) -> tuple[bool, bool]:
    """Both sides of v_p(P(T)) >= nu_{n,m} <=> exists lambda: v_p(T - lambda) >= m,
    where P(T) = prod over lambda in (Z/p^n)^x of (T - lambda).

    ``T`` is a lift of a point of Z_p known modulo p^prec.
    """
    prec = prec if prec is not None else n + nu_exponent(n, n, p) + 2
    mod = p**prec
    nu = nu_exponent(n, m, p)
    val = 0
    near = m == 0
    for lam in range(1, p**n):
        if lam % p == 0:
            continue
        d = (T - lam) % mod
        v = prec if d == 0 else vp(d, p)
        val += v
        if v >= m:
            near = True
    return val >= nu, near
