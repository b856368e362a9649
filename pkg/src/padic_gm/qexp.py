"""Truncated q-expansions with p-adic coefficients and their operators.

Coefficients are stored as residues mod p^M; ``f[n]`` hands out PadicElems.
Every operator states how it consumes q-precision:

    theta, cont_action, nabla_chi, deplete   Q -> Q
    up                                        Q -> ceil(Q / p)
    v                                         Q -> Q (capped at storage)
    hecke_T(ell)                              Q -> ceil(Q / ell)
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from . import _series
from .errors import (
    CtxMismatch,
    MathPreconditionError,
    NoUnitRoot,
    NotAUnit,
    NotPRegular,
    QPrecisionExhausted,
    WeightMismatch,
)
from .mahler import LocAnChar, char_eval
from .padic import PadicCtx, PadicElem, hensel_lift, vp, zeta


class NonIntegralEisenstein(MathPreconditionError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _merge_weight(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a != b:
        raise WeightMismatch(f"weights {a} and {b} differ")
    return a


class QExpansion:
    """sum_{n<Q} a_n q^n with a_n in Z_p known mod p^M."""

    __slots__ = ("p", "M", "coeffs", "weight", "level", "eps_p")

    def __init__(self, coeffs: Sequence[int], p: int, M: int, weight: int | None = None,
                 level: int = 1, eps_p: int = 1):
        mod = p**M
        self.p = p
        self.M = M
        self.coeffs = [int(c) % mod for c in coeffs]
        self.weight = weight
        self.level = level
        self.eps_p = eps_p % mod

    @classmethod
    def from_list(cls, coeffs, ctx: PadicCtx, **tags) -> "QExpansion":
        return cls(coeffs, ctx.p, ctx.M, **tags)

    @classmethod
    def zero(cls, ctx: PadicCtx, Q: int, **tags) -> "QExpansion":
        return cls([0] * Q, ctx.p, ctx.M, **tags)

    @classmethod
    def monomial(cls, ctx: PadicCtx, Q: int, n: int, c: int = 1, **tags) -> "QExpansion":
        a = [0] * Q
        a[n] = c
        return cls(a, ctx.p, ctx.M, **tags)

    # views --------------------------------------------------------------
    @property
    def ctx(self) -> PadicCtx:
        return PadicCtx(self.p, self.M)

    @property
    def Q(self) -> int:
        return len(self.coeffs)

    @property
    def modulus(self) -> int:
        return self.p**self.M

    def __getitem__(self, n: int) -> PadicElem:
        return PadicElem.from_int(self.coeffs[n], self.p, self.M)

    def __len__(self):
        return len(self.coeffs)

    def _like(self, coeffs, **overrides) -> "QExpansion":
        tags = dict(weight=self.weight, level=self.level, eps_p=self.eps_p)
        tags.update(overrides)
        M = tags.pop("M", self.M)
        return QExpansion(coeffs, self.p, M, **tags)

    def truncate(self, Q: int) -> "QExpansion":
        if Q > self.Q:
            raise QPrecisionExhausted(f"requested Q={Q} > available {self.Q}")
        return self._like(self.coeffs[:Q])

    def reduce(self, M: int) -> "QExpansion":
        if M > self.M:
            raise ValueError("cannot raise precision")
        return self._like(self.coeffs, M=M)

    def valuation(self) -> int:
        """min over n of v(a_n) (M for the zero series)."""
        return min((vp(c, self.p) for c in self.coeffs if c), default=self.M)

    def is_cuspidal(self) -> bool:
        return self.coeffs[0] == 0 if self.coeffs else True

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "QExpansion"):
        if not isinstance(other, QExpansion):
            raise TypeError(type(other))
        if other.p != self.p:
            raise CtxMismatch(f"p={self.p} vs p={other.p}")

    def _binary(self, other, sign):
        self._check(other)
        w = _merge_weight(self.weight, other.weight)
        M = min(self.M, other.M)
        Q = min(self.Q, other.Q)
        mod = self.p**M
        c = [(self.coeffs[n] + sign * other.coeffs[n]) % mod for n in range(Q)]
        return QExpansion(c, self.p, M, weight=w, level=_lcm(self.level, other.level), eps_p=self.eps_p)

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __neg__(self):
        return self._like([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, QExpansion):
            self._check(other)
            M = min(self.M, other.M)
            Q = min(self.Q, other.Q)
            w = None if self.weight is None or other.weight is None else self.weight + other.weight
            c = _series.mul(self.coeffs, other.coeffs, Q, self.p**M)
            return QExpansion(c, self.p, M, weight=w, level=_lcm(self.level, other.level),
                              eps_p=self.eps_p * other.eps_p)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "QExpansion":
        if isinstance(c, PadicElem):
            if c.p != self.p:
                raise CtxMismatch("scalar from another prime")
            if c.val < 0:
                raise NotAUnit("non-integral scalar")
            M = min(self.M, c.prec)
            c = c.residue
            return self._like([x * c for x in self.coeffs], M=M)
        if isinstance(c, Fraction):
            c = PadicElem.from_rational(c, self.p, self.M)
            return self.scale(c)
        return self._like([x * int(c) for x in self.coeffs])

    def __pow__(self, e: int) -> "QExpansion":
        c = _series.power(self.coeffs, e, self.Q, self.modulus)
        w = None if self.weight is None else self.weight * e
        return self._like(c, weight=w)

    def inverse(self) -> "QExpansion":
        if self.coeffs[0] % self.p == 0:
            raise NotAUnit("constant term is not a unit")
        c = _series.inverse(self.coeffs, self.Q, self.modulus)
        w = None if self.weight is None else -self.weight
        return self._like(c, weight=w)

    def __eq__(self, other):
        if not isinstance(other, QExpansion) or other.p != self.p:
            return NotImplemented
        M = min(self.M, other.M)
        mod = self.p**M
        Q = min(self.Q, other.Q)
        return all((self.coeffs[n] - other.coeffs[n]) % mod == 0 for n in range(Q))

    __hash__ = None

    def congruent(self, other: "QExpansion", e: int, Q: int | None = None) -> bool:
        """Coefficientwise congruence mod p^e for n < Q."""
        mod = self.p**e
        Q = min(self.Q, other.Q) if Q is None else Q
        return all((self.coeffs[n] - other.coeffs[n]) % mod == 0 for n in range(Q))

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:6])
        return f"QExpansion(p={self.p}, M={self.M}, Q={self.Q}, k={self.weight}, N={self.level}, [{head}, ...])"

    # text format --------------------------------------------------------
    def to_text(self) -> str:
        k = "-" if self.weight is None else str(self.weight)
        lines = [f"QEXP p={self.p} M={self.M} Q={self.Q} N={self.level} k={k} eps_p={self.eps_p}"]
        lines += [f"{n} {c}" for n, c in enumerate(self.coeffs) if c]
        return "\n".join(lines) + "\n"


def parse_qexp_blocks(text: str) -> list[QExpansion]:
    """Parse one or more QEXP blocks (other header lines are skipped)."""
    blocks: list[QExpansion] = []
    cur = None
    hdr = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("QEXP"):
            if cur is not None:
                blocks.append(_finish(hdr, cur))
            hdr = _parse_header(line)
            cur = [0] * hdr["Q"]
            continue
        if cur is None:
            continue  # e.g. a wrapper header
        parts = line.split()
        if not parts[0].lstrip("-").isdigit():
            # a wrapper header between blocks
            blocks.append(_finish(hdr, cur))
            cur = None
            continue
        if len(parts) != 2:
            raise ValueError(f"malformed coefficient line: {line!r}")
        n, c = int(parts[0]), int(parts[1])
        if not 0 <= n < hdr["Q"]:
            raise ValueError(f"index {n} outside 0..{hdr['Q'] - 1}")
        cur[n] = c
    if cur is not None:
        blocks.append(_finish(hdr, cur))
    return blocks


def parse_qexp(text: str) -> QExpansion:
    blocks = parse_qexp_blocks(text)
    if len(blocks) != 1:
        raise ValueError(f"expected one QEXP block, found {len(blocks)}")
    return blocks[0]


def _parse_header(line: str) -> dict:
    fields = {}
    for tok in line.split()[1:]:
        key, _, val = tok.partition("=")
        fields[key] = val
    for key in ("p", "M", "Q", "N", "k", "eps_p"):
        if key not in fields:
            raise ValueError(f"QEXP header missing {key}")
    return {
        "p": int(fields["p"]),
        "M": int(fields["M"]),
        "Q": int(fields["Q"]),
        "N": int(fields["N"]),
        "k": None if fields["k"] == "-" else int(fields["k"]),
        "eps_p": int(fields["eps_p"]),
    }


def _finish(h, coeffs) -> QExpansion:
    PadicCtx(h["p"], h["M"])  # validates
    return QExpansion(coeffs, h["p"], h["M"], weight=h["k"], level=h["N"], eps_p=h["eps_p"])


# --- operators ----------------------------------------------------------------


def _residue(x, mod: int) -> int:
    if isinstance(x, PadicElem):
        return x.residue % mod
    return int(x) % mod


def cont_action(phi: Callable[[int], object], f: QExpansion, weight: int | None = None) -> QExpansion:
    """a_n -> phi(n) a_n (phi a value oracle on Z_{>=0})."""
    mod = f.modulus
    c = [_residue(phi(n), mod) * a % mod if a else 0 for n, a in enumerate(f.coeffs)]
    return f._like(c, weight=weight)


def theta(f: QExpansion) -> QExpansion:
    w = None if f.weight is None else f.weight + 2
    mod = f.modulus
    return f._like([n * a % mod for n, a in enumerate(f.coeffs)], weight=w)


def theta_power(f: QExpansion, t: int) -> QExpansion:
    w = None if f.weight is None else f.weight + 2 * t
    mod = f.modulus
    return f._like([pow(n, t, mod) * a % mod if a else 0 for n, a in enumerate(f.coeffs)], weight=w)


def up_operator(f: QExpansion) -> QExpansion:
    """b_n = a_{pn}; Q_out = ceil(Q/p)."""
    p = f.p
    Q_out = (f.Q - 1) // p + 1
    if Q_out < 1:
        raise QPrecisionExhausted("no coefficients left after U")
    return f._like([f.coeffs[p * n] for n in range(Q_out)], level=_lcm(f.level, p))


def v_operator(f: QExpansion, Q_out: int | None = None) -> QExpansion:
    """b_{pn} = a_n, zero elsewhere; Q_out defaults to min(Q*p, Q) storage (i.e. Q)."""
    p = f.p
    Q_out = f.Q if Q_out is None else Q_out
    if Q_out > f.Q * p:
        raise QPrecisionExhausted(f"V of a series with Q={f.Q} is known only below {f.Q * p}")
    c = [0] * Q_out
    for n in range((Q_out - 1) // p + 1):
        c[p * n] = f.coeffs[n]
    return f._like(c, level=f.level * p)


def deplete(f: QExpansion) -> QExpansion:
    """Remove the coefficients a_n with p | n."""
    p = f.p
    c = [0 if n % p == 0 else a for n, a in enumerate(f.coeffs)]
    return f._like(c, level=f.level * p * p if f.level % p else f.level * p)


def indicator_units(p: int) -> Callable[[int], int]:
    return lambda n: 0 if n % p == 0 else 1


def nabla_chi(chi: LocAnChar, f: QExpansion, weight: int | None = None) -> QExpansion:
    """a_n -> chi(n) a_n for p not dividing n, 0 otherwise."""
    if chi.ctx.p != f.p:
        raise CtxMismatch("character and series live over different primes")
    if weight is None and f.weight is not None:
        t = chi.integer_exponent()
        weight = None if t is None else f.weight + 2 * t
    mod = f.modulus
    M = min(f.M, chi.ctx.M)
    out = []
    for n, a in enumerate(f.coeffs):
        if n % f.p == 0 or a == 0:
            out.append(0)
        else:
            out.append(char_eval(chi, n).residue * a % mod)
    g = deplete(f)
    return g._like(out, weight=weight, M=M)


def hecke_T(f: QExpansion, ell: int) -> QExpansion:
    """T_ell at level prime to ell, trivial character: a_{ell n} + ell^{k-1} a_{n/ell}."""
    if f.weight is None:
        raise WeightMismatch("Hecke operator needs a weight tag")
    if f.level % ell == 0:
        raise ValueError(f"T_{ell} requires level prime to {ell}")
    Q_out = (f.Q - 1) // ell + 1
    mod = f.modulus
    lk = pow(ell, f.weight - 1, mod) if f.weight >= 1 else 0
    c = []
    for n in range(Q_out):
        x = f.coeffs[ell * n]
        if n % ell == 0:
            x += lk * f.coeffs[n // ell]
        c.append(x % mod)
    return f._like(c)


# --- classical constructors ---------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """B_k with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, k + 1):
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B[k]


def _sigma_sieve(k1: int, Q: int, mod: int, skip_p: int | None = None) -> list[int]:
    """sigma_{k1}(n) mod ``mod`` for n < Q (divisors prime to skip_p only)."""
    out = [0] * Q
    for d in range(1, Q):
        if skip_p and d % skip_p == 0:
            continue
        w = pow(d, k1, mod)
        for n in range(d, Q, d):
            out[n] += w
    return [x % mod for x in out]


def eisenstein(k: int, ctx: PadicCtx, Q: int) -> QExpansion:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n (constant term 1)."""
    if k < 4 or k % 2:
        raise ValueError("E_k needs even k >= 4")
    base = _eisenstein_cached(k, ctx.p, ctx.M, Q)
    return base._like(list(base.coeffs))


@lru_cache(maxsize=64)
def _eisenstein_cached(k, p, M, Q):
    c = Fraction(-2 * k) / bernoulli(k)
    if vp(c, p) < 0:
        raise NonIntegralEisenstein(f"2k/B_k is not p-integral for k={k}, p={p}")
    mod = p**M
    cr = PadicElem.from_rational(c, p, M).residue
    sig = _sigma_sieve(k - 1, Q, mod)
    coeffs = [1] + [cr * s % mod for s in sig[1:]]
    return QExpansion(coeffs[:Q], p, M, weight=k)


def delta(ctx: PadicCtx, Q: int) -> QExpansion:
    base = _delta_cached(ctx.p, ctx.M, Q)
    return base._like(list(base.coeffs))


@lru_cache(maxsize=16)
def _delta_cached(p, M, Q):
    mod = p**M
    # Euler: prod (1 - q^n) = sum_j (-1)^j q^{j(3j-1)/2}
    eta = [0] * Q
    j = 0
    while True:
        hit = False
        for jj in (j, -j) if j else (0,):
            e = jj * (3 * jj - 1) // 2
            if e < Q:
                eta[e] = (-1) ** (jj % 2)
                hit = True
        if not hit and j > 0:
            break
        j += 1
    eta24 = _series.power([x % mod for x in eta], 24, Q, mod)
    coeffs = [0] + eta24[: Q - 1]
    return QExpansion(coeffs, p, M, weight=12)


def dim_mk(k: int) -> int:
    """dim M_k(SL_2(Z)) for even k >= 0."""
    if k < 0 or k % 2:
        return 0
    if k == 2:
        return 0
    return k // 12 + (0 if k % 12 == 2 else 1)


def _vm_factor(k: int):
    """(a, b) with 4a + 6b = k, a in {0, 1, 2}."""
    for a in range(3):
        r = k - 4 * a
        if r >= 0 and r % 6 == 0:
            return a, r // 6
    raise ValueError(k)


class _VMCache:
    """Powers of E_4, E_6, Delta for a fixed (p, M, Q)."""

    _store: dict = {}

    def __init__(self, p, M, Q):
        self.p, self.M, self.Q = p, M, Q
        self.mod = p**M
        ctx = PadicCtx(p, M)
        self.E4 = eisenstein(4, ctx, Q).coeffs
        self.E6 = eisenstein(6, ctx, Q).coeffs
        self.D = delta(ctx, Q).coeffs
        self.pw = {}

    @classmethod
    def get(cls, p, M, Q):
        key = (p, M, Q)
        if key not in cls._store:
            if len(cls._store) > 8:
                cls._store.clear()
            cls._store[key] = cls(p, M, Q)
        return cls._store[key]

    def power(self, name, e):
        key = (name, e)
        if key in self.pw:
            return self.pw[key]
        base = {"E4": self.E4, "E6": self.E6, "D": self.D}[name]
        if e == 0:
            out = [1] + [0] * (self.Q - 1)
        elif e == 1:
            out = list(base)
        else:
            half = self.power(name, e // 2)
            out = _series.mul(half, half, self.Q, self.mod)
            if e % 2:
                out = _series.mul(out, base, self.Q, self.mod)
        self.pw[key] = out
        return out

    def product(self, k, j):
        """Delta^j E_4^a E_6^b of weight k."""
        a, b = _vm_factor(k - 12 * j)
        out = self.power("D", j)
        if a:
            out = _series.mul(out, self.power("E4", a), self.Q, self.mod)
        if b:
            out = _series.mul(out, self.power("E6", b), self.Q, self.mod)
        return out


def victor_miller(k: int, ctx: PadicCtx, Q: int, indices: Iterable[int] | None = None) -> list[QExpansion]:
    """Basis m_0..m_{d-1} of M_k(SL_2(Z)) with m_i = q^i + O(q^d).

    ``indices`` restricts the output to the requested members (the reduction
    only involves members of larger index).
    """
    d = dim_mk(k)
    if d == 0:
        return []
    want = sorted(set(range(d) if indices is None else indices))
    lo = want[0]
    cache = _VMCache.get(ctx.p, ctx.M, Q)
    mod = cache.mod
    F = {j: cache.product(k, j) for j in range(lo, d)}
    m: dict = {}
    for i in range(d - 1, lo - 1, -1):
        vec = list(F[i])
        for j in range(i + 1, d):
            c = vec[j] if j < Q else 0
            if c:
                mj = m[j]
                vec = [(x - c * y) % mod for x, y in zip(vec, mj)]
        m[i] = vec
    return [QExpansion(m[i], ctx.p, ctx.M, weight=k) for i in want]


def eis_family_specialize(k2: int, ctx: PadicCtx, Q: int, N: int = 1) -> QExpansion:
    """E^{[p]}_{k2}: sum_{(n,p)=1} sum_{d|n} d^{k2-1}(zeta_N^d + (-1)^{k2} zeta_N^{-d}) q^n."""
    p, mod = ctx.p, ctx.modulus
    if (p - 1) % N:
        raise ValueError("N must divide p-1")
    z = zeta(N, ctx).value.residue
    zinv = pow(z, -1, mod)
    sign = -1 if k2 % 2 else 1
    out = [0] * Q
    for d in range(1, Q):
        if d % p == 0:
            continue
        w = pow(d, k2 - 1, mod) * (pow(z, d, mod) + sign * pow(zinv, d, mod)) % mod
        if w == 0:
            continue
        for n in range(d, Q, d):
            if n % p:
                out[n] += w
    return QExpansion([x % mod for x in out], p, ctx.M, weight=k2, level=N * p)


# --- p-stabilisation --------------------------------------------------------------


def hecke_eigenvalue(f: QExpansion, ell: int) -> PadicElem:
    """a_ell / a_1 for an eigenform with a_1 a unit."""
    if f.coeffs[1] % f.p == 0:
        raise NotAUnit("a_1 is not a unit; pass the eigenvalue explicitly")
    return f[ell] / f[1]


def hecke_roots(a_p: PadicElem, eps_p: int, k: int, p: int, M: int) -> tuple[PadicElem, PadicElem]:
    """Roots (alpha, beta) of X^2 - a_p X + eps p^{k-1}, v(alpha) <= v(beta)."""
    c0 = PadicElem.from_int(eps_p, p, M + k) * PadicElem.exact_power(p, k - 1, M)
    if a_p.is_unit():
        alpha = hensel_lift([c0.residue, (-a_p).residue, 1], a_p.residue % p, PadicCtx(p, M))
        beta = c0 / alpha
        return alpha, beta
    # both roots non-units: quadratic formula in Q_p (p odd)
    if p == 2:
        raise NotPRegular("non-ordinary case at p = 2 is not supported")
    disc = a_p * a_p - c0 * 4
    if disc.is_zero():
        raise NotPRegular("Hecke polynomial has a double root")
    if disc.val % 2:
        raise NotPRegular("roots are not in Q_p")
    u = disc.unit
    rel = disc.prec - disc.val
    from .padic import roots_mod_p

    if not roots_mod_p([-u, 0, 1], p):
        raise NotPRegular("roots are not in Q_p")
    r = hensel_lift([-u, 0, 1], roots_mod_p([-u, 0, 1], p)[0], PadicCtx(p, max(rel, 1)))
    sq = PadicElem(p, r.residue, disc.val // 2, disc.val // 2 + rel)
    r1 = (a_p + sq) / 2
    r2 = (a_p - sq) / 2
    return (r1, r2) if r1.val <= r2.val else (r2, r1)


def p_stabilize(f: QExpansion, root_choice: str = "unit", a_p: PadicElem | None = None):
    """Return (f - other * V f, eigenvalue, other).

    With ``root_choice="unit"`` the U-eigenvalue is the unit root alpha and
    the subtracted root is beta = eps p^{k-1} / alpha; ``"nonunit"`` swaps them.
    """
    if f.weight is None:
        raise WeightMismatch("p-stabilisation needs a weight tag")
    p, M, k = f.p, f.M, f.weight
    if a_p is None:
        a_p = hecke_eigenvalue(f, p)
    if root_choice == "unit" and not a_p.is_unit():
        raise NoUnitRoot("a_p is not a unit: no unit root")
    alpha, beta = hecke_roots(a_p, f.eps_p, k, p, M)
    if root_choice == "unit":
        eig, other = alpha, beta
    elif root_choice == "nonunit":
        eig, other = beta, alpha
    else:
        raise ValueError("root_choice must be 'unit' or 'nonunit'")
    Vf = v_operator(f)
    if other.val < 0:
        raise NotAUnit("non-integral root")
    g = f - Vf.scale(other)
    return g._like(g.coeffs, level=_lcm(f.level, p)), eig, other
