"""Fixed-precision p-adic scalars.

A :class:`PadicElem` is ``unit * p**val`` known modulo ``p**prec`` (absolute
precision).  Integral elements at the default precision behave exactly like
residues in ``Z/p^M``; division by p-divisible integers lowers ``prec`` and
records it, so every loss of precision stays visible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import CtxMismatch, NotAUnit, NotPRegular, PrecisionExhausted


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def vp(n: int, p: int) -> int:
    """Valuation of a nonzero integer (or Fraction)."""
    if isinstance(n, Fraction):
        return vp(n.numerator, p) - vp(n.denominator, p)
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_or(n: int, p: int, cap: int) -> int:
    """Valuation capped at ``cap`` (0 maps to ``cap``)."""
    if n == 0:
        return cap
    return min(vp(n, p), cap)


def vp_factorial(k: int, p: int) -> int:
    v, q = 0, p
    while q <= k:
        v += k // q
        q *= p
    return v


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    n, factors, d = p - 1, [], 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise ValueError(p)


@dataclass(frozen=True)
class PadicCtx:
    p: int
    M: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.M < 1:
            raise ValueError("precision M must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p**self.M

    def __call__(self, x) -> "PadicElem":
        return PadicElem.from_rational(x, self.p, self.M)


class PadicElem:
    """Element of Q_p known modulo ``p**prec``."""

    __slots__ = ("p", "unit", "val", "prec")

    def __init__(self, p: int, unit: int, val: int, prec: int):
        # normalised: unit coprime to p and reduced, or unit == 0 and val == prec
        self.p = p
        if unit == 0 or val >= prec:
            self.unit, self.val, self.prec = 0, prec, prec
            return
        while unit % p == 0:
            unit //= p
            val += 1
            if val >= prec:
                self.unit, self.val, self.prec = 0, prec, prec
                return
        self.unit = unit % p ** (prec - val)
        self.val = val
        self.prec = prec

    # constructors -----------------------------------------------------
    @classmethod
    def from_int(cls, n: int, p: int, prec: int) -> "PadicElem":
        return cls(p, n, 0, prec)

    @classmethod
    def from_rational(cls, x, p: int, prec: int) -> "PadicElem":
        """``prec`` is the absolute precision of the result."""
        if isinstance(x, PadicElem):
            return x.with_prec(min(prec, x.prec))
        x = Fraction(x)
        if x == 0:
            return cls(p, 0, prec, prec)
        v = vp(x, p)
        num, den = x.numerator, x.denominator
        num //= p ** max(v, 0)
        den //= p ** max(-v, 0)
        if prec - v <= 0:
            return cls(p, 0, prec, prec)
        mod = p ** (prec - v)
        return cls(p, num * pow(den, -1, mod) % mod, v, prec)

    @classmethod
    def exact_power(cls, p: int, e: int, relprec: int) -> "PadicElem":
        """``p**e`` carried with ``relprec`` significant digits."""
        return cls(p, 1, e, e + relprec)

    # views ------------------------------------------------------------
    @property
    def ctx(self) -> PadicCtx:
        return PadicCtx(self.p, max(self.prec, 1))

    @property
    def residue(self) -> int:
        """Representative in ``[0, p**prec)``; requires an integral element."""
        if self.val < 0:
            raise ValueError("non-integral element has no residue")
        return self.unit * self.p**self.val % self.p**self.prec

    @property
    def valuation(self) -> int:
        return self.val

    @property
    def relprec(self) -> int:
        return self.prec - self.val

    def is_zero(self) -> bool:
        return self.unit == 0

    def is_unit(self) -> bool:
        return self.unit != 0 and self.val == 0

    def is_integral(self) -> bool:
        return self.val >= 0

    def norm(self) -> Fraction:
        """|x|_p = p^-v (zero at this precision reports p^-prec)."""
        return Fraction(1, self.p**self.val) if self.val >= 0 else Fraction(self.p**-self.val)

    def with_prec(self, prec: int) -> "PadicElem":
        return PadicElem(self.p, self.unit, self.val, min(prec, self.prec))

    def lift(self) -> Fraction:
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "PadicElem":
        if isinstance(other, PadicElem):
            if other.p != self.p:
                raise CtxMismatch(f"p={self.p} vs p={other.p}")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicElem.from_rational(other, self.p, self.prec + max(0, -self.val) + 64)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(self.prec, o.prec)
        e = min(self.val, o.val)
        n = self.unit * self.p ** (self.val - e) + o.unit * self.p ** (o.val - e)
        return PadicElem(self.p, n, e, prec)

    __radd__ = __add__

    def __neg__(self):
        return PadicElem(self.p, -self.unit, self.val, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(self.prec + o.val, o.prec + self.val)
        if self.unit == 0 or o.unit == 0:
            return PadicElem(self.p, 0, prec, prec)
        return PadicElem(self.p, self.unit * o.unit, self.val + o.val, prec)

    __rmul__ = __mul__

    def invert(self) -> "PadicElem":
        """Inverse of a unit, as a ring operation in Z/p^prec."""
        if not self.is_unit():
            raise NotAUnit(f"{self!r} is not a unit")
        return PadicElem(self.p, pow(self.unit, -1, self.p**self.prec), 0, self.prec)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.unit == 0:
            raise NotAUnit("division by an element that is zero at this precision")
        inv_unit = pow(o.unit, -1, self.p ** max(o.prec - o.val, 1))
        rel = min(self.prec - self.val, o.prec - o.val)
        val = self.val - o.val
        if self.unit == 0:
            return PadicElem(self.p, 0, self.prec - o.val, self.prec - o.val)
        return PadicElem(self.p, self.unit * inv_unit, val, val + rel)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return (PadicElem(self.p, 1, 0, self.prec + 64) / self) ** (-n)
        if n == 0:
            return PadicElem(self.p, 1, 0, self.prec + max(0, -self.val))
        if self.unit == 0:
            return PadicElem(self.p, 0, self.prec, self.prec)
        # precision of x^n: relative precision is preserved (p odd or unit part)
        rel = self.prec - self.val
        return PadicElem(self.p, pow(self.unit, n, self.p**rel), n * self.val, n * self.val + rel)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except CtxMismatch:
            return False
        if o is NotImplemented:
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None

    def __repr__(self):
        if self.unit == 0:
            return f"O({self.p}^{self.prec})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.prec})"

    def __int__(self):
        return self.residue


def padic(x, ctx: PadicCtx) -> PadicElem:
    return PadicElem.from_rational(x, ctx.p, ctx.M)


def divide_exact(x: PadicElem, k: int) -> PadicElem:
    """x / k, losing exactly v_p(k) digits of absolute precision."""
    if k == 0:
        raise ZeroDivisionError
    v = vp(k, x.p)
    if x.prec - v <= 0:
        raise PrecisionExhausted(f"dividing by {k} exhausts precision {x.prec}")
    u = k // x.p**v
    rel = x.prec - x.val
    if x.unit == 0:
        return PadicElem(x.p, 0, x.prec - v, x.prec - v)
    mod = x.p ** max(rel, 1)
    return PadicElem(x.p, x.unit * pow(u, -1, mod), x.val - v, x.prec - v)


def _poly_eval(coeffs, x, mod):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % mod
    return acc


def hensel_lift(coeffs, seed: int, ctx: PadicCtx) -> PadicElem:
    """Lift a simple root mod p of sum(coeffs[i] X^i) to precision ctx.M.

    ``coeffs`` are integers or integral PadicElems (low degree first).
    """
    p, M = ctx.p, ctx.M
    cs = [c.residue if isinstance(c, PadicElem) else int(c) for c in coeffs]
    dcs = [i * c for i, c in enumerate(cs)][1:]
    if _poly_eval(cs, seed, p) != 0:
        raise NotPRegular(f"seed {seed} is not a root mod {p}")
    if _poly_eval(dcs, seed, p) == 0:
        raise NotPRegular(f"derivative vanishes mod {p} at seed {seed}")
    x, prec = seed % p, 1
    while prec < M:
        prec = min(2 * prec, M)
        mod = p**prec
        fx = _poly_eval(cs, x, mod)
        dfx = _poly_eval(dcs, x, mod)
        x = (x - fx * pow(dfx, -1, mod)) % mod
    return PadicElem.from_int(x, p, M)


def hensel_root(coeffs, seed: int, ctx: PadicCtx) -> PadicElem:
    """Root of the quadratic ``c0 + c1 X + c2 X^2`` lifted from ``seed``."""
    if len(coeffs) != 3:
        raise ValueError("hensel_root expects a quadratic (c0, c1, c2)")
    return hensel_lift(coeffs, seed, ctx)


def roots_mod_p(coeffs, p: int) -> list[int]:
    cs = [c.residue if isinstance(c, PadicElem) else int(c) for c in coeffs]
    return [x for x in range(p) if _poly_eval(cs, x, p) == 0]


def teichmuller(x: int, ctx: PadicCtx) -> PadicElem:
    p, M = ctx.p, ctx.M
    if x % p == 0:
        raise NotAUnit(f"{x} is divisible by {p}")
    mod = p**M
    y = x % mod
    for _ in range(M):
        y = pow(y, p, mod)
    return PadicElem.from_int(y, p, M)


def sqrt_padic(a: int, ctx: PadicCtx) -> PadicElem:
    """A square root of a p-adic unit square (p odd)."""
    p = ctx.p
    if a % p == 0:
        raise NotAUnit(a)
    rs = roots_mod_p([-a, 0, 1], p)
    if not rs:
        raise NotPRegular(f"{a} is not a square mod {p}")
    return hensel_lift([-a, 0, 1], rs[0], ctx)


class CycloElem:
    """Element of Z_p(zeta_N) = Z_p for N | p-1, stored as a PadicElem."""

    __slots__ = ("value", "N")

    def __init__(self, value: PadicElem, N: int):
        if (value.p - 1) % N:
            raise ValueError(f"N={N} must divide p-1={value.p - 1}")
        self.value = value
        self.N = N

    def __mul__(self, other):
        if isinstance(other, CycloElem):
            return CycloElem(self.value * other.value, self.N * other.N // _gcd(self.N, other.N))
        return CycloElem(self.value * other, self.N)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, CycloElem):
            return CycloElem(self.value + other.value, self.N * other.N // _gcd(self.N, other.N))
        return CycloElem(self.value + other, self.N)

    __radd__ = __add__

    def __pow__(self, n: int):
        return CycloElem(self.value**n, self.N)

    def __eq__(self, other):
        if isinstance(other, CycloElem):
            return self.value == other.value
        return self.value == other

    __hash__ = None

    def __repr__(self):
        return f"CycloElem({self.value!r}, N={self.N})"


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def zeta(N: int, ctx: PadicCtx) -> CycloElem:
    """The fixed primitive N-th root of unity teichmuller(g)^((p-1)/N)."""
    if (ctx.p - 1) % N:
        raise ValueError(f"N={N} must divide p-1")
    g = primitive_root(ctx.p)
    return CycloElem(teichmuller(g, ctx) ** ((ctx.p - 1) // N), N)
