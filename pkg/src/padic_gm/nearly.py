"""Finite-degree nearly overconvergent forms: filtered vectors of q-expansions
in the unit-root splitting, the vector action of nabla, restriction to p-adic
forms and the overconvergent projector with its weight poles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import PoleAtWeight, PrecisionExhausted, WeightMismatch
from .nilpotent import BaseRing, NilpotentElem
from .qexp import QExpansion, parse_qexp_blocks, theta, theta_power


@dataclass(frozen=True)
class FilteredForm:
    """sum_j g_j Y^j with g_j of weight k - 2j (degree r = len(comps) - 1)."""

    k: int
    comps: tuple

    def __post_init__(self):
        if not self.comps:
            raise ValueError("a filtered form has at least one component")
        object.__setattr__(self, "comps", tuple(
            g._like(g.coeffs, weight=self.k - 2 * j) for j, g in enumerate(self.comps)))

    @classmethod
    def embed(cls, g: QExpansion, k: int | None = None, r: int = 0) -> "FilteredForm":
        k = g.weight if k is None else k
        if k is None:
            raise WeightMismatch("embedding needs a weight")
        zero = g._like([0] * g.Q)
        return cls(k, (g,) + (zero,) * r)

    @property
    def r(self) -> int:
        return len(self.comps) - 1

    @property
    def p(self) -> int:
        return self.comps[0].p

    @property
    def M(self) -> int:
        return min(g.M for g in self.comps)

    @property
    def Q(self) -> int:
        return min(g.Q for g in self.comps)

    def padded(self, r: int) -> "FilteredForm":
        if r < self.r:
            raise ValueError("cannot pad to a smaller degree")
        zero = self.comps[0]._like([0] * self.Q)
        return FilteredForm(self.k, self.comps + (zero,) * (r - self.r))

    def trimmed(self) -> "FilteredForm":
        """Drop vanishing top components (the filtration degree of the element)."""
        comps = list(self.comps)
        while len(comps) > 1 and all(x % comps[-1].modulus == 0 for x in comps[-1].coeffs):
            comps.pop()
        return FilteredForm(self.k, tuple(comps))

    def _binary(self, other: "FilteredForm", sign: int) -> "FilteredForm":
        if self.k != other.k:
            raise WeightMismatch(f"weights {self.k} and {other.k} differ")
        r = max(self.r, other.r)
        a, b = self.padded(r), other.padded(r)
        return FilteredForm(self.k, tuple(x + y if sign > 0 else x - y for x, y in zip(a.comps, b.comps)))

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def scale(self, c) -> "FilteredForm":
        return FilteredForm(self.k, tuple(g.scale(c) for g in self.comps))

    def __mul__(self, other: "FilteredForm") -> "FilteredForm":
        """Product as polynomials in Y."""
        r = self.r + other.r
        out = [None] * (r + 1)
        for i, g in enumerate(self.comps):
            for j, h in enumerate(other.comps):
                term = g._like(g.coeffs, weight=None) * h._like(h.coeffs, weight=None)
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        return FilteredForm(self.k + other.k, tuple(out))

    def __eq__(self, other):
        if not isinstance(other, FilteredForm) or self.k != other.k:
            return False
        r = max(self.r, other.r)
        return all(x == y for x, y in zip(self.padded(r).comps, other.padded(r).comps))

    def to_text(self) -> str:
        head = f"NHOC k={self.k} r={self.r}\n"
        return head + "".join(g.to_text() for g in self.comps)


def parse_nhoc(text: str) -> FilteredForm:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("NHOC"):
        raise ValueError("missing NHOC header")
    fields = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
    k, r = int(fields["k"]), int(fields["r"])
    blocks = parse_qexp_blocks(text)
    if len(blocks) != r + 1:
        raise ValueError(f"NHOC r={r} expects {r + 1} QEXP blocks, found {len(blocks)}")
    return FilteredForm(k, tuple(blocks))


# --- the graded factor ------------------------------------------------------------


@dataclass(frozen=True)
class GradedFactorTable:
    """nabla maps the Gr_{j-1} slot of weight k into Gr_j by c_j, j = 1..r."""

    k: int
    factors: tuple

    def __getitem__(self, j: int) -> int:
        return self.factors[j - 1]

    @property
    def r(self) -> int:
        return len(self.factors)

    def poles(self) -> list[int]:
        return [j for j, c in enumerate(self.factors, 1) if c == 0]


def _model_monomial(ring: BaseRing, a: int, b: int, D: int) -> NilpotentElem:
    """X^a Y^b in the u = X - 1 chart, a any integer (binomial series cut at degree D)."""
    mod = ring.p**ring.M
    terms = {}
    for i in range(D + 1):
        coef = _gen_binom(a, i)
        if coef % mod:
            vec = [0] * ring.Q
            vec[0] = coef % mod
            terms[(i, b, 0)] = vec
    return NilpotentElem(ring, 0, D + b, terms)


def _gen_binom(a: int, i: int) -> int:
    if a >= 0:
        return math.comb(a, i)
    return (-1) ** i * math.comb(i - a - 1, i)


def _symmetric(x: int, mod: int) -> int:
    x %= mod
    return x - mod if x > mod // 2 else x


@lru_cache(maxsize=None)
def derive_graded_factor(k: int, j: int) -> int:
    """c_j at weight k read from nabla_theta on the isotypic monomial X^{k-j+1} Y^{j-1}.

    The image has Y-degree j; its u^0 Y^j coefficient divided by that of
    X^{k-j} Y^j (which is 1) is the scalar.
    """
    ring = BaseRing(2, 64, 1)
    a = k - j + 1
    src = _model_monomial(ring, a, j - 1, 2)
    img = src.nabla_theta()
    vec = img.terms.get((0, j, 0))
    c = 0 if vec is None else _symmetric(vec[0], ring.p**ring.M)
    return c


@lru_cache(maxsize=None)
def graded_factor_table(k: int, r: int) -> GradedFactorTable:
    return GradedFactorTable(k, tuple(derive_graded_factor(k, j) for j in range(1, r + 1)))


def u_kappa(k: int) -> int:
    """u_kappa for the classical weight k in this normalisation (c_j = u_kappa - (j-1))."""
    return derive_graded_factor(k, 1)


# --- nabla, restriction, projection ------------------------------------------------


def nabla_vector(F: FilteredForm) -> FilteredForm:
    """(nabla F)_j = Theta g_j + c_j g_{j-1}; the top slot r+1 is c_{r+1} g_r."""
    tab = graded_factor_table(F.k, F.r + 1)
    zero = F.comps[0]._like([0] * F.Q)
    comps = list(F.comps) + [zero]
    out = []
    for j, g in enumerate(comps):
        th = theta(g) if j <= F.r else zero
        if j:
            th = th._like(th.coeffs, weight=None) + comps[j - 1]._like(comps[j - 1].coeffs, weight=None).scale(tab[j])
        out.append(th)
    return FilteredForm(F.k + 2, tuple(out))


def restriction(F: FilteredForm) -> QExpansion:
    """The Y = 0 slot (X -> 1, Y -> 0, Z -> 1)."""
    return F.comps[0]


def projector_poles(k: int, r: int) -> list[int]:
    """Indices j <= r at which oc_projection in weight k divides by zero."""
    return graded_factor_table(k - 2, r).poles() if r else []


@dataclass
class OCProjection:
    """form / p^shift is the overconvergent projection, certified to ``certified`` digits."""

    form: QExpansion
    shift: int
    certified: int


def oc_projection_scaled(F: FilteredForm) -> OCProjection:
    p = F.p
    M = F.M
    shift = 0
    cur = F
    while cur.r > 0:
        r = cur.r
        c = graded_factor_table(cur.k - 2, r)[r]
        if c == 0:
            raise PoleAtWeight(r, cur.k)
        v = 0
        while c % p == 0:
            c //= p
            v += 1
        top = cur.comps[r]
        # nabla(G) has top slot c * G_top = p^v * top: take G_top = top / unit(c)
        # and scale the rest by p^v so the subtraction stays integral
        G_top = top.scale(pow(c, -1, top.modulus))
        if v:
            cur = cur.scale(p**v)
            shift += v
        # G_top sits in slot r-1 of a weight k-2 form
        zero = G_top._like([0] * G_top.Q)
        G = FilteredForm(cur.k - 2, (zero,) * (r - 1) + (G_top,))
        diff = cur - nabla_vector(G)
        cur = FilteredForm(cur.k, diff.comps[:r])
    if shift >= M:
        raise PrecisionExhausted(f"graded-factor divisions used {shift} of {M} digits")
    return OCProjection(cur.comps[0], shift, M - shift)


def oc_projection(F: FilteredForm) -> QExpansion:
    """Degree-0 remainder after stripping nabla-images from the top down.

    The result carries M - (p-adic valuation lost in the divisions) digits.
    """
    res = oc_projection_scaled(F)
    g = res.form
    if res.shift == 0:
        return g
    mod = F.p**res.shift
    if any(x % mod for x in g.coeffs):
        raise PrecisionExhausted("projection is not p-integral at this precision")
    return g._like([x // mod for x in g.coeffs], M=res.certified)


def nabla_power_coefficients(k: int, t: int) -> list[int]:
    """a_j with (nabla^t embed(F))_j = a_j Theta^{t-j} F for F of weight k."""
    a = [1]
    for step in range(t):
        tab = graded_factor_table(k + 2 * step, step + 1)
        a = [(a[j] if j < len(a) else 0) + (tab[j] * a[j - 1] if j else 0) for j in range(step + 2)]
    return a


def nabla_power(F: QExpansion, k: int, t: int, theta_F=None) -> FilteredForm:
    """nabla^t of the degree-0 form F; ``theta_F(r)`` may supply Theta^r F."""
    tf = theta_F or (lambda r: theta_power(F, r))
    comps = []
    for j, a in enumerate(nabla_power_coefficients(k, t)):
        g = tf(t - j)
        comps.append(g._like(g.coeffs, weight=None).scale(a))
    return FilteredForm(k + 2 * t, tuple(comps))


def oc_representative(F: QExpansion, kF: int, G: QExpansion, kG: int, t: int, theta_F=None):
    """(form, const) with form / const = Pi^oc(nabla^t F * G) as q-expansions."""
    res = oc_projection_scaled(nabla_power(F, kF, t, theta_F) * FilteredForm.embed(G, kG))
    return res.form, F.p**res.shift
