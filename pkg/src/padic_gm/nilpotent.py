"""Falling-factorial operators and the nilpotent model of the connection.

Elements carry a precision ledger: integral residues ``stored`` known modulo
``p**prec`` together with a ``shift`` e, the value being ``stored / p**e``.

Base ring S+: truncated q-series sum_{n<Q} s_n q^n with theta = q d/dq.
Nilpotent ring L_m: polynomials in u = X-1, Y, w = Z-1 over S+ of total degree
<= D, with the derivation nabla(u) = Y, nabla(Y) = nabla(w) = 0 and nabla = theta
on S+.  Coefficients are stored in the unscaled monomials u^a Y^b w^c; the
radius exponent m only enters the norm, where |u|_m = |Y|_m = |w|_m = p^-m.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .errors import DegreeOverflow, PrecisionExhausted, TailNotCertified
from .mahler import GrowthGauge, MahlerSeries
from .padic import vp, vp_factorial


def _val(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
        if v >= cap:
            return cap
    return v


# --- base ring ---------------------------------------------------------------


@dataclass(frozen=True)
class BaseRing:
    p: int
    M: int
    Q: int

    @property
    def modulus(self) -> int:
        return self.p**self.M

    def elem(self, coeffs: Sequence[int], shift: int = 0) -> "BaseElem":
        c = [int(x) % self.modulus for x in coeffs[: self.Q]]
        c += [0] * (self.Q - len(c))
        return BaseElem(self, tuple(c), shift, self.M)

    def one(self) -> "BaseElem":
        return self.elem([1])

    def q(self, n: int = 1) -> "BaseElem":
        c = [0] * self.Q
        if n < self.Q:
            c[n] = 1
        return self.elem(c)

    def random(self, rng: random.Random) -> "BaseElem":
        return self.elem([rng.randrange(self.modulus) for _ in range(self.Q)])


class _Ledgered:
    """Shared ledger logic; subclasses expose ``_vecs`` and ``_rebuild``."""

    p: int
    shift: int
    prec: int

    def _vecs(self):  # -> list of int lists
        raise NotImplementedError

    def _rebuild(self, vecs, shift, prec):
        raise NotImplementedError

    def _min_val(self) -> int | None:
        best = None
        for vec in self._vecs():
            for x in vec:
                if x:
                    v = _val(x, self.p, self.prec)
                    if v < self.prec and (best is None or v < best):
                        best = v
        return best

    def normalize(self):
        """Strip common powers of p from ``stored`` while ``shift`` > 0."""
        mv = self._min_val()
        if mv is None:
            return self._rebuild(self._vecs(), 0, self.prec - self.shift) if self.shift > 0 else self
        k = min(mv, self.shift)
        if k <= 0:
            return self
        pk = self.p**k
        mod = self.p ** (self.prec - k)
        vecs = [[(x // pk) % mod for x in vec] for vec in self._vecs()]
        return self._rebuild(vecs, self.shift - k, self.prec - k)

    def divide_exact(self, n: int):
        """value / n, recording v_p(n) in the shift."""
        v = vp(n, self.p)
        u = n // self.p**v
        mod = self.p**self.prec
        inv = pow(u, -1, mod)
        vecs = [[x * inv % mod for x in vec] for vec in self._vecs()]
        out = self._rebuild(vecs, self.shift + v, self.prec).normalize()
        if out.prec <= 0:
            raise PrecisionExhausted("precision ledger exhausted")
        return out

    def scale(self, c: int):
        mod = self.p**self.prec
        return self._rebuild([[x * c % mod for x in vec] for vec in self._vecs()], self.shift, self.prec)

    @property
    def abs_prec(self) -> int:
        """The value is known modulo p**abs_prec."""
        return self.prec - self.shift

    def _aligned(self, other):
        if self.p != other.p:
            raise ValueError("different primes")
        e = max(self.shift, other.shift)
        prec = min(self.prec + e - self.shift, other.prec + e - other.shift)
        mod = self.p**prec
        a = [[x * self.p ** (e - self.shift) % mod for x in vec] for vec in self._vecs()]
        b = [[x * self.p ** (e - other.shift) % mod for x in vec] for vec in other._vecs()]
        return a, b, e, prec, mod

    def is_integral(self) -> bool:
        n = self.norm_exponent()
        return n is None or n <= 0

    def is_zero(self) -> bool:
        return self._min_val() is None


class BaseElem(_Ledgered):
    __slots__ = ("ring", "coeffs", "shift", "prec", "p")

    def __init__(self, ring: BaseRing, coeffs: tuple, shift: int = 0, prec: int | None = None):
        self.ring = ring
        self.p = ring.p
        self.coeffs = tuple(coeffs)
        self.shift = shift
        self.prec = ring.M if prec is None else prec

    def _vecs(self):
        return [self.coeffs]

    def _rebuild(self, vecs, shift, prec):
        return BaseElem(self.ring, tuple(vecs[0]), shift, prec)

    def __add__(self, other):
        a, b, e, prec, mod = self._aligned(other)
        return BaseElem(self.ring, tuple((x + y) % mod for x, y in zip(a[0], b[0])), e, prec)

    def __sub__(self, other):
        a, b, e, prec, mod = self._aligned(other)
        return BaseElem(self.ring, tuple((x - y) % mod for x, y in zip(a[0], b[0])), e, prec)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if isinstance(other, NilpotentElem):
            return other * self
        Q = self.ring.Q
        prec = min(self.prec, other.prec)
        mod = self.p**prec
        out = [0] * Q
        for i, x in enumerate(self.coeffs):
            if x:
                for j in range(Q - i):
                    out[i + j] += x * other.coeffs[j]
        return BaseElem(self.ring, tuple(v % mod for v in out), self.shift + other.shift, prec)

    __rmul__ = __mul__

    def theta(self) -> "BaseElem":
        mod = self.p**self.prec
        return BaseElem(self.ring, tuple(n * x % mod for n, x in enumerate(self.coeffs)), self.shift, self.prec)

    def cont_action(self, phi: Callable[[int], int]) -> "BaseElem":
        mod = self.p**self.prec
        return BaseElem(
            self.ring, tuple(int(phi(n)) * x % mod for n, x in enumerate(self.coeffs)), self.shift, self.prec
        )

    def norm_exponent(self) -> int | None:
        """log_p of the sup norm of the coefficients (None for zero)."""
        mv = self._min_val()
        return None if mv is None else self.shift - mv

    def __eq__(self, other):
        if not isinstance(other, BaseElem):
            return NotImplemented
        a, b, e, prec, mod = self._aligned(other)
        return all((x - y) % mod == 0 for x, y in zip(a[0], b[0]))

    __hash__ = None

    def __repr__(self):
        terms = [f"{x}q^{n}" for n, x in enumerate(self.coeffs) if x]
        return f"BaseElem(({' + '.join(terms) or '0'})/p^{self.shift} mod p^{self.prec})"


# --- nilpotent ring ----------------------------------------------------------


def monomials(D: int):
    return [(a, b, c) for d in range(D + 1) for a in range(d + 1) for b in range(d + 1 - a) for c in [d - a - b]]


class NilpotentElem(_Ledgered):
    """sum s_{abc} u^a Y^b w^c over S+, stored unscaled; see module docstring."""

    __slots__ = ("ring", "m", "D", "terms", "shift", "prec", "p")

    def __init__(self, ring: BaseRing, m: int, D: int, terms: dict, shift: int = 0, prec: int | None = None):
        self.ring = ring
        self.p = ring.p
        self.m = m
        self.D = D
        for key in terms:
            if sum(key) > D:
                raise DegreeOverflow(f"monomial {key} exceeds degree cap {D}")
        self.terms = {k: tuple(v) for k, v in terms.items() if any(v)}
        self.shift = shift
        self.prec = ring.M if prec is None else prec

    # ledger plumbing
    def _keys(self):
        return sorted(self.terms)

    def _vecs(self):
        return [self.terms[k] for k in self._keys()]

    def _rebuild(self, vecs, shift, prec):
        return NilpotentElem(self.ring, self.m, self.D, dict(zip(self._keys(), vecs)), shift, prec)

    # constructors
    @classmethod
    def zero(cls, ring, m, D):
        return cls(ring, m, D, {})

    @classmethod
    def from_base(cls, s: BaseElem, m: int, D: int, mono=(0, 0, 0)):
        return cls(s.ring, m, D, {mono: s.coeffs}, s.shift, s.prec)

    @classmethod
    def generator(cls, ring, m, D, n, a, b, c):
        """q^n ((X-1)/p^m)^a (Y/p^m)^b ((Z-1)/p^m)^c, a unit vector of L_m."""
        vec = [0] * ring.Q
        vec[n] = 1
        return cls(ring, m, D, {(a, b, c): vec}, m * (a + b + c), ring.M + m * (a + b + c))

    @classmethod
    def from_xyz(cls, s: BaseElem, a: int, b: int, c: int, m: int, D: int):
        """s X^a Y^b Z^c expanded in u = X-1, w = Z-1."""
        terms = {}
        mod = s.p**s.prec
        for i in range(a + 1):
            for j in range(c + 1):
                coef = math.comb(a, i) * math.comb(c, j)
                terms[(i, b, j)] = tuple(coef * x % mod for x in s.coeffs)
        return cls(s.ring, m, D, terms, s.shift, s.prec)

    # algebra
    def _combine(self, other, sign):
        a, b, e, prec, mod = self._aligned(other)
        ka, kb = self._keys(), other._keys()
        out = {}
        Q = self.ring.Q
        for k, vec in zip(ka, a):
            out[k] = list(vec)
        for k, vec in zip(kb, b):
            cur = out.get(k, [0] * Q)
            out[k] = [(x + sign * y) % mod for x, y in zip(cur, vec)]
        return NilpotentElem(self.ring, self.m, min(self.D, other.D), out, e, prec)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if isinstance(other, BaseElem):
            other = NilpotentElem.from_base(other, self.m, self.D)
        Q = self.ring.Q
        prec = min(self.prec, other.prec)
        mod = self.p**prec
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2])
                if sum(key) > self.D:
                    raise DegreeOverflow(f"product reaches degree {sum(key)} > {self.D}")
                acc = out.setdefault(key, [0] * Q)
                for i, x in enumerate(v1):
                    if x:
                        for j in range(Q - i):
                            acc[i + j] += x * v2[j]
        out = {k: [x % mod for x in v] for k, v in out.items()}
        return NilpotentElem(self.ring, self.m, self.D, out, self.shift + other.shift, prec)

    __rmul__ = __mul__

    def nabla_theta(self, s_lambda: int = 1) -> "NilpotentElem":
        """The derivation with u -> Y, Y -> 0, w -> 0 and s_lambda*theta on S+."""
        mod = self.p**self.prec
        Q = self.ring.Q
        out: dict = {}
        for (a, b, c), vec in self.terms.items():
            acc = out.setdefault((a, b, c), [0] * Q)
            for n, x in enumerate(vec):
                acc[n] = (acc[n] + s_lambda * n * x) % mod
            if a:
                acc2 = out.setdefault((a - 1, b + 1, c), [0] * Q)
                for n, x in enumerate(vec):
                    acc2[n] = (acc2[n] + a * x) % mod
        return NilpotentElem(self.ring, self.m, self.D, out, self.shift, self.prec)

    def evaluate(self) -> BaseElem:
        """X -> 1, Y -> 0, Z -> 1."""
        vec = self.terms.get((0, 0, 0), (0,) * self.ring.Q)
        return BaseElem(self.ring, vec, self.shift, self.prec)

    def norm_exponent(self) -> int | None:
        """log_p ||.||_m = max over monomials of (shift - v(s_abc) - m(a+b+c))."""
        best = None
        for key, vec in self.terms.items():
            d = sum(key)
            for x in vec:
                if x:
                    v = _val(x, self.p, self.prec)
                    if v >= self.prec:
                        continue
                    e = self.shift - v - self.m * d
                    if best is None or e > best:
                        best = e
        return best

    def with_m(self, m: int) -> "NilpotentElem":
        return NilpotentElem(self.ring, m, self.D, self.terms, self.shift, self.prec)

    def __eq__(self, other):
        if not isinstance(other, NilpotentElem):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"NilpotentElem(m={self.m}, D={self.D}, {len(self.terms)} monomials, /p^{self.shift} mod p^{self.prec})"


def nabla_theta(v: NilpotentElem, s_lambda: int = 1) -> NilpotentElem:
    return v.nabla_theta(s_lambda)


def random_nilpotent(ring: BaseRing, m: int, D: int, rng: random.Random, integral: bool = True) -> NilpotentElem:
    """Random element of the unit ball of L_m (integral in rescaled variables)."""
    out = NilpotentElem.zero(ring, m, D)
    for a, b, c in monomials(D):
        for n in range(ring.Q):
            g = NilpotentElem.generator(ring, m, D, n, a, b, c)
            out = out + g.scale(rng.randrange(ring.modulus))
    return out


# --- falling factorials ------------------------------------------------------


def falling_factorial_apply(T: Callable, k: int, v):
    """f_k(T) v = T(T-1)...(T-k+1) v / k! with the shift ledger."""
    w = v
    for j in range(k):
        w = T(w) - w.scale(j)
    return w.divide_exact(math.factorial(k)) if k > 1 else w


def _blocks(I: Sequence[int]) -> list[list[int]]:
    out: list[list[int]] = []
    for i in I:
        if out and out[-1][-1] == i - 1:
            out[-1].append(i)
        else:
            out.append([i])
    return out


@lru_cache(maxsize=None)
def _lemma_weights(k: int, r: int, Q: int) -> tuple:
    """Per n < Q: sum over I of mult^-1 C(k,r)^-1 f_I(n), with C(a, r) omitted."""
    if k > 12:
        raise ValueError("subset enumeration is capped at k <= 12")
    out = [Fraction(0)] * Q
    inv_kr = Fraction(math.factorial(r) * math.factorial(k - r), math.factorial(k))
    for I in itertools.combinations(range(k), k - r):
        blocks = _blocks(I)
        lens = [len(b) for b in blocks]
        # C(k-r; k_1..k_l)^-1
        mult_inv = Fraction(math.prod(math.factorial(x) for x in lens), math.factorial(k - r))
        w = mult_inv * inv_kr
        for n in range(Q):
            # f_I(theta) acts on q^n by prod over blocks of prod(n - i) / k_j!
            fI = Fraction(1)
            for blk in blocks:
                g = 1
                for i in blk:
                    g *= n - i
                fI *= Fraction(g, math.factorial(len(blk)))
            out[n] += w * fI
    return tuple(out)


def lemma_formula_rhs(s: BaseElem, a: int, b: int, c: int, k: int, m: int = 1, D: int | None = None,
                      variables: str = "XYZ") -> NilpotentElem:
    """Closed formula for f_k(nabla)(s X^a Y^b Z^c), evaluated literally.

    With ``variables="XYZ"`` the monomials are X^a Y^b Z^c and the result is
    re-expanded in u = X-1, w = Z-1; with ``"uYw"`` they are u^a Y^b w^c.
    """
    ring = s.ring
    p = ring.p
    D = a + b + c if D is None else D
    E = vp_factorial(k, p)
    prec = s.prec
    mod = p**prec
    pE = Fraction(p**E)
    total = NilpotentElem(ring, m, D, {}, s.shift + E, prec)
    for r in range(min(k, a) + 1):
        lw = _lemma_weights(k, r, ring.Q)
        ca = math.comb(a, r)
        vec = []
        for n in range(ring.Q):
            wt = lw[n] * ca * pE  # p-integral by construction
            if wt.denominator % p == 0:
                raise PrecisionExhausted("weight not p-integral at the ledger exponent")
            wres = wt.numerator * pow(wt.denominator, -1, mod) % mod
            vec.append(wres * s.coeffs[n] % mod)
        piece = BaseElem(ring, tuple(vec), s.shift + E, prec)
        if variables == "XYZ":
            term = NilpotentElem.from_xyz(piece, a - r, b + r, c, m, D)
        else:
            term = NilpotentElem(ring, m, D, {(a - r, b + r, c): piece.coeffs}, piece.shift, prec)
        total = total + term
    return total.normalize()


# --- operator gauges ---------------------------------------------------------


@dataclass
class OperatorGauge:
    """Observed norms log_p ||f_k(T)|| for k < K on a set of unit generators."""

    norms: list  # int exponents (None when f_k(T) vanishes at precision)

    def sup(self, eps) -> Fraction:
        """log_p sup_k p^{-k eps} ||f_k(T)||."""
        eps = Fraction(eps)
        vals = [Fraction(e) - k * eps for k, e in enumerate(self.norms) if e is not None]
        return max(vals)


def operator_norm_table(T: Callable, generators: Sequence, K: int) -> OperatorGauge:
    """log_p ||f_k(T)|| = max over the orthonormal generators, k < K."""
    best: list = [None] * K
    for g in generators:
        w = g
        for k in range(K):
            if k:
                w = T(w) - w.scale(k - 1)
            val = w.divide_exact(math.factorial(k)) if k > 1 else w
            e = val.norm_exponent()
            if e is not None and (best[k] is None or e > best[k]):
                best[k] = e
    return OperatorGauge(best)


def lm_generators(ring: BaseRing, m: int, D: int):
    return [NilpotentElem.generator(ring, m, D, n, a, b, c) for (a, b, c) in monomials(D) for n in range(ring.Q)]


def base_generators(ring: BaseRing):
    return [ring.q(n) for n in range(ring.Q)]


# --- epsilon-analytic actions ------------------------------------------------


@dataclass
class ActionResult:
    value: object
    certified: int  # digits of absolute precision certified
    K: int


def epsilon_action_apply(f: MahlerSeries, gauge: GrowthGauge | None, T: Callable, v, target_prec: int,
                         op_gauge: tuple = (0, 0), lift: Callable | None = None) -> ActionResult:
    """sum_{k<K} a_k f_k(T) v with a certified tail.

    ``gauge`` bounds |a_k| <= p^{sup - k eps}; ``op_gauge = (eps_T, sup_T)``
    bounds ||f_k(T)|| <= p^{sup_T + k eps_T}.  The input ``v`` is lifted to a
    working precision where division by k! is harmless; the ambiguity of that
    lift is controlled by the operator gauge.  ``lift`` maps ``v`` to the
    working precision (default: reinterpret residues in a wider ring).
    """
    p = f.ctx.p
    K = f.K
    eps_T, sup_T = Fraction(op_gauge[0]), Fraction(op_gauge[1])
    vnorm = v.norm_exponent() or 0
    if f.tail_valuation is not None and math.isinf(f.tail_valuation):
        tail_cert = math.inf
    else:
        if gauge is None:
            raise TailNotCertified("no growth gauge supplied for a non-polynomial function")
        if gauge.eps <= eps_T:
            raise TailNotCertified("function gauge does not beat the operator gauge")
        if gauge.sup_exponent is None:
            tail_cert = math.inf
        else:
            # sup over k >= K of sup_f - k eps + sup_T + k eps_T + |v|
            tail_exp = gauge.sup_exponent + sup_T + vnorm - K * (gauge.eps - eps_T)
            tail_cert = math.floor(-tail_exp)
    lift_cert = v.abs_prec - math.ceil(sup_T + max(K - 1, 0) * max(eps_T, 0))
    certified = min(tail_cert, lift_cert)
    if certified < target_prec:
        raise TailNotCertified(f"certified {certified} digits < target {target_prec} at K={K}")
    extra = vp_factorial(max(K - 1, 0), p) + 2
    wide = lift(v, extra) if lift else _widen(v, extra)
    acc = None
    w = wide
    for k in range(K):
        if k:
            w = T(w) - w.scale(k - 1)
        a = f.coeffs[k]
        if a.is_zero():
            continue
        term = w.divide_exact(math.factorial(k)) if k > 1 else w
        if a.val < 0:
            raise ValueError("non-integral Mahler coefficient")
        term = term.scale(a.residue)
        acc = term if acc is None else acc + term
    if acc is None:
        acc = wide.scale(0)
    acc = acc.normalize()
    return ActionResult(_narrow(acc, certified), certified, K)


def _widen(v, extra: int):
    if isinstance(v, BaseElem):
        ring = BaseRing(v.ring.p, v.ring.M + extra, v.ring.Q)
        return BaseElem(ring, v.coeffs, v.shift, v.prec + extra)
    ring = BaseRing(v.ring.p, v.ring.M + extra, v.ring.Q)
    return NilpotentElem(ring, v.m, v.D, v.terms, v.shift, v.prec + extra)


def _narrow(v, certified: int):
    """Reduce to absolute precision ``certified`` in the original ring size."""
    if math.isinf(certified):
        return v
    prec = certified + v.shift
    mod = v.p ** max(prec, 0)
    if isinstance(v, BaseElem):
        ring = BaseRing(v.p, max(prec, 1), v.ring.Q)
        return BaseElem(ring, tuple(x % mod for x in v.coeffs), v.shift, prec)
    ring = BaseRing(v.p, max(prec, 1), v.ring.Q)
    return NilpotentElem(ring, v.m, v.D, {k: [x % mod for x in vec] for k, vec in v.terms.items()}, v.shift, prec)


# --- perturbation ------------------------------------------------------------


@dataclass
class PerturbationReport:
    passed: bool
    N: int
    threshold_N: int
    log_C: Fraction
    max_excess: float  # max_k of lhs - rhs exponent (<= 0 means the bound holds)
    worst_k: int
    lhs: list = field(default_factory=list)


def perturbation_threshold(log_C, p: int) -> int:
    """Smallest N >= 1 with p^{-N + 1/(p-1)} <= C^{-1}."""
    return max(1, math.ceil(Fraction(log_C) + Fraction(1, p - 1)))


def perturbation_check(T1: Callable, T2: Callable, generators: Sequence, eps, N: int | None, K: int,
                       p: int, gauge1: OperatorGauge | None = None) -> PerturbationReport:
    """Check p^{-k eps} ||f_k(T1 + p^N T2)|| <= max(C, p^{-k eps/2 + 2 log_p k} C), k < K,
    where C = sup_k p^{-k eps/2} ||f_k(T1)||.  ``N=None`` uses the threshold."""
    eps = Fraction(eps)
    if gauge1 is None:
        gauge1 = operator_norm_table(T1, generators, K)
    log_C = gauge1.sup(eps / 2)
    thr = perturbation_threshold(log_C, p)
    N = thr if N is None else N
    pN = p**N

    def T(x):
        return T1(x) + T2(x).scale(pN)

    table = operator_norm_table(T, generators, K)
    worst, worst_k, lhs_all = -math.inf, 0, []
    for k, e in enumerate(table.norms):
        if e is None:
            lhs_all.append(None)
            continue
        lhs = float(e - k * eps)
        rhs = float(log_C)
        if k >= 1:
            rhs = max(rhs, float(-k * eps / 2 + log_C) + 2 * math.log(k, p))
        lhs_all.append(lhs)
        if lhs - rhs > worst:
            worst, worst_k = lhs - rhs, k
    return PerturbationReport(worst <= 1e-12, N, thr, log_C, worst, worst_k, lhs_all)


def z_swap_operator(c: int = 2) -> Callable:
    """Integral operator 1 -> (Z-1)/p^m, (Z-1)/p^m -> c on each q^n, zero elsewhere.

    On the span of q^n and q^n (Z-1)/p^m, nabla + T has eigenvalues n +- sqrt(c);
    for c a non-square unit these leave Z_p and f_k(nabla + T) loses |k!|.
    """

    def T(v: NilpotentElem) -> NilpotentElem:
        m, p, Q = v.m, v.p, v.ring.Q
        mod = p ** (v.prec + m)
        one = v.terms.get((0, 0, 0), (0,) * Q)
        w = v.terms.get((0, 0, 1), (0,) * Q)
        terms = {(0, 0, 1): one, (0, 0, 0): [c * x * p ** (2 * m) % mod for x in w]}
        return NilpotentElem(v.ring, m, v.D, terms, v.shift + m, v.prec + m).normalize()

    return T


# --- overconvergence ---------------------------------------------------------


@dataclass
class OverconvergenceReport:
    exponent: Fraction
    exponent_positive: bool
    hypotheses_hold: bool
    property_holds: bool
    bound_holds: bool

    @property
    def passed(self) -> bool:
        return self.exponent_positive and self.bound_holds


def overconvergence_exponent(C_r, eps, gamma, delta) -> Fraction:
    C_r, eps, gamma, delta = map(Fraction, (C_r, eps, gamma, delta))
    return (delta - 1) * C_r + (gamma - delta * eps) + (delta - 1)


def overconvergence_bound_check(norms_r: Sequence, norms_s: Sequence, norms_inf: Sequence, p: int,
                                C_r, C_eps, eps, gamma, delta) -> OverconvergenceReport:
    """Numeric check of the norm propagation for f_k(nabla)(x), k < len(norms).

    ``norms_*[k]`` are log_p ||f_k(nabla)(x)|| in the norms r, s and infinity.
    Hypotheses: ||k! f_k x||_r <= p^{k C_r}, ||k! f_k x||_inf <= p^{C_eps + k eps}/|k!|.
    Property: ||y||_s <= p^{c - delta h} when ||y||_r <= p^c and ||y||_inf <= p^{c-h}.
    Conclusion: p^{-k gamma} ||f_k x||_s <= p^{-k * exponent + delta C_eps}.
    """
    C_r, C_eps, eps, gamma, delta = map(Fraction, (C_r, C_eps, eps, gamma, delta))
    expo = overconvergence_exponent(C_r, eps, gamma, delta)
    hyp = prop = bound = True
    for k, (nr, ns, ni) in enumerate(zip(norms_r, norms_s, norms_inf)):
        vk = vp_factorial(k, p)
        # log_p ||k! y|| = log_p ||y|| - v_p(k!)
        nr_k, ns_k, ni_k = (None if x is None else Fraction(x) - vk for x in (nr, ns, ni))
        c = k * C_r
        h = k * C_r - C_eps - k * eps + vk
        if nr_k is not None and nr_k > c:
            hyp = False
        if ni_k is not None and ni_k > c - h:
            hyp = False
        if ns_k is not None and h > 0 and ns_k > c - delta * h:
            prop = False
        if ns is not None and Fraction(ns) - k * gamma > -k * expo + delta * C_eps:
            bound = False
    return OverconvergenceReport(expo, expo > 0, hyp, prop, bound)
