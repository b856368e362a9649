"""U_p on overconvergent forms of level 1, ordinary projection, the eigen
coefficient functional, Euler factors and triple-product / Rankin values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import (
    BasisDegenerate,
    MultiplicityNotOne,
    NoOrdinaryBlock,
    NotInSpan,
    NotOrdinary,
    NotUnbalanced,
    QPrecisionExhausted,
    WeightMismatch,
)
from .mahler import LocAnChar
from .padic import PadicCtx, PadicElem, hensel_lift, roots_mod_p, vp
from .qexp import (
    QExpansion,
    deplete,
    dim_mk,
    eis_family_specialize,
    eisenstein,
    hecke_roots,
    nabla_chi,
    theta_power,
    up_operator,
    v_operator,
    victor_miller,
)

# --- small exact / modular linear algebra ----------------------------------------


def _val(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


def mat_mul(A, B, mod):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) % mod for col in Bt] for row in A]


def mat_vec(A, x, mod):
    return [sum(a * b for a, b in zip(row, x)) % mod for row in A]


def mat_pow(A, e, mod):
    n = len(A)
    R = [[int(i == j) for j in range(n)] for i in range(n)]
    B = [row[:] for row in A]
    while e:
        if e & 1:
            R = mat_mul(R, B, mod)
        e >>= 1
        if e:
            B = mat_mul(B, B, mod)
    return R


def mat_inv(A, p, mod):
    """Inverse mod p^M of a matrix invertible mod p."""
    n = len(A)
    M = [list(A[i]) + [int(i == j) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] % p), None)
        if piv is None:
            raise BasisDegenerate("matrix is singular mod p")
        M[c], M[piv] = M[piv], M[c]
        inv = pow(M[c][c], -1, mod)
        M[c] = [x * inv % mod for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [(x - f * y) % mod for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def independent_columns(A, p):
    """Greedy maximal set of columns independent mod p (row-echelon mod p)."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    chosen, basis = [], []  # basis: list of (pivot_row, vector) reduced mod p
    for j in range(cols):
        v = [A[i][j] % p for i in range(rows)]
        for piv, b in basis:
            if v[piv]:
                f = v[piv]
                v = [(x - f * y) % p for x, y in zip(v, b)]
        piv = next((i for i in range(rows) if v[i]), None)
        if piv is None:
            continue
        inv = pow(v[piv], -1, p)
        v = [x * inv % p for x in v]
        basis.append((piv, v))
        chosen.append(j)
    return chosen


def charpoly(A, mod=None):
    """Coefficients of det(x - A), highest degree first (Berkowitz, division free)."""
    n = len(A)
    if n == 0:
        return [1]
    red = (lambda x: x % mod) if mod else (lambda x: x)
    vect = [1, red(-A[0][0])]
    for r in range(1, n):
        C = [A[i][r] for i in range(r)]
        R = A[r][:r]
        T = [1, red(-A[r][r])]
        X = C[:]
        for _ in range(r):
            T.append(red(-sum(R[i] * X[i] for i in range(r))))
            X = [red(sum(A[i][j] * X[j] for j in range(r))) for i in range(r)]
        vect = [red(sum(T[i - j] * vect[j] for j in range(min(i, r) + 1))) for i in range(r + 2)]
    return vect


# --- Katz basis and the U_p matrix ------------------------------------------------


@dataclass
class UpMatrixData:
    p: int
    k: int
    d: int
    Q: int
    M: int
    basis: list  # QExpansions e_j
    levels: list  # Katz level of each basis element
    A: list  # d x d residues mod p^M, column j = coordinates of U e_j
    certified: list  # per-entry certified digits
    trunc_valuation: int  # min over j of v(U e_j - sum_l A_lj e_l), n < Q/p
    first_excluded_level: int
    charseries: list = field(default_factory=list)  # det(1 - tA) coefficients
    char_certified: list = field(default_factory=list)

    @property
    def modulus(self) -> int:
        return self.p**self.M


@lru_cache(maxsize=32)
def _katz_basis_cached(p, k, d, Q, M):
    if p < 5:
        raise ValueError("the Katz basis needs p >= 5 (E_{p-1} = 1 mod p)")
    if k % 2 or k < 0:
        raise ValueError("level-1 weights are even and non-negative")
    ctx = PadicCtx(p, M)
    Einv = eisenstein(p - 1, ctx, Q).inverse()
    basis, levels = [], []
    power = None
    i = 0
    while len(basis) < d + 1:
        w = k + i * (p - 1)
        lo = dim_mk(w - (p - 1)) if i else 0
        hi = dim_mk(w)
        if hi > lo:
            if i:
                power = Einv if power is None else power * Einv
            for m in victor_miller(w, ctx, Q, indices=range(lo, hi)):
                e = m * power if i else m
                basis.append(e._like(e.coeffs, weight=k))
                levels.append(i)
        elif i:
            power = Einv if power is None else power * Einv
        i += 1
        if i > 10 * (d + 2) + 10:
            raise BasisDegenerate("weights do not produce enough basis elements")
    return basis[:d], levels[: d + 1]


def katz_basis(p: int, k: int, d: int, Q: int, M: int):
    """First d Katz basis q-expansions E_{p-1}^{-i} m_{k+i(p-1), j} and their levels.

    The returned level list has d+1 entries; the last one is the level of the
    first excluded basis element.
    """
    return _katz_basis_cached(p, k, d, Q, M)


def coordinates(F: QExpansion, basis, d: int):
    """Triangular solve on the first d coefficients (e_j = q^j + higher)."""
    mod = F.modulus
    if F.Q < d:
        raise QPrecisionExhausted(f"need {d} coefficients, have {F.Q}")
    r = list(F.coeffs[:d])
    y = []
    for j in range(d):
        c = r[j] % mod
        y.append(c)
        if c:
            e = basis[j].coeffs
            for n in range(j, d):
                r[n] = (r[n] - c * e[n]) % mod
    return y


def residual_valuation(F: QExpansion, basis, y, Q: int | None = None) -> int:
    """min_n v(F - sum y_j e_j) over n < Q (M when it vanishes)."""
    mod = F.modulus
    Q = min(F.Q, basis[0].Q if basis else F.Q) if Q is None else Q
    r = list(F.coeffs[:Q])
    for j, c in enumerate(y):
        if c:
            e = basis[j].coeffs
            for n in range(j, Q):
                r[n] -= c * e[n]
    return min((_val(x % mod, F.p, F.M) for x in r), default=F.M)


def up_matrix(p: int, k: int, d: int, Q: int, M: int) -> UpMatrixData:
    if Q < p * d:
        raise QPrecisionExhausted(f"Q={Q} must be at least p*d={p * d}")
    basis, levels = katz_basis(p, k, d, Q, M)
    mod = p**M
    cols = []
    trunc = M
    for e in basis:
        Ue = up_operator(e)
        y = coordinates(Ue, basis, d)
        cols.append(y)
        if Ue.Q > d:
            trunc = min(trunc, residual_valuation(Ue, basis, y, Ue.Q))
    A = [[cols[j][i] for j in range(d)] for i in range(d)]
    # columns of U beyond the basis: v(A_lj) >= (p lvl(l) - lvl(j))/(p+1) - 1 for excluded l
    I = levels[d]
    bound = min(math.ceil(Fraction(p * I - lv, p + 1)) - 1 for lv in levels[:d])
    trunc = max(0, min(trunc, bound))
    data = UpMatrixData(p, k, d, Q, M, basis, levels[:d], A, [[M] * d for _ in range(d)], trunc, I)
    data.charseries = charpoly(A, mod)
    data.char_certified = char_certified_digits(data)
    return data


def char_certified_digits(data: UpMatrixData) -> list:
    """Digits of det(1 - tA) coefficients not affected by truncating the basis.

    A principal minor of size n that involves an excluded basis element has
    valuation at least (p-1)/(p+1) * (sum of the levels it involves) - n,
    using the row bound v(A_lj) >= (p*lvl(l) - lvl(j))/(p+1) - 1.
    """
    p, M = data.p, data.M
    lv = sorted(data.levels)
    I = data.first_excluded_level
    out = [M]
    for n in range(1, data.d + 1):
        s = I + sum(lv[: n - 1])
        bound = math.ceil(Fraction(p - 1, p + 1) * s) - n
        out.append(max(0, min(M, bound)))
    return out


# --- ordinary projection ------------------------------------------------------------


@dataclass
class OrdinaryProjector:
    data: UpMatrixData
    P: list  # projector matrix in Katz coordinates
    W: list  # d x r basis of the ordinary subspace
    L: list  # r x d left inverse on im(W)
    Uord_inv: list  # r x r inverse of U restricted to the ordinary block (W coordinates)
    rank: int


def ordinary_projector_matrix(data: UpMatrixData) -> OrdinaryProjector:
    p, d, M = data.p, data.d, data.M
    mod = p**M
    A = data.A
    K = 1
    while K < d * M + 1:
        K *= 2
    C = mat_pow(A, K, mod)
    cols = independent_columns(C, p)
    r = len(cols)
    if r == 0:
        raise NoOrdinaryBlock("U has no unit eigenvalue on this space")
    W = [[C[i][j] for j in cols] for i in range(d)]
    # rows of W giving an invertible r x r block
    Wt = [list(x) for x in zip(*W)]
    rows = independent_columns(Wt, p)
    Wr = [W[i] for i in rows]
    Wr_inv = mat_inv(Wr, p, mod)
    L = [[0] * d for _ in range(r)]
    for a in range(r):
        for b, i in enumerate(rows):
            L[a][i] = Wr_inv[a][b]
    Uord = mat_mul(mat_mul(L, A, mod), W, mod)
    Uord_inv = mat_inv(Uord, p, mod)
    UK_inv = mat_pow(Uord_inv, K, mod)
    P = mat_mul(mat_mul(W, UK_inv, mod), mat_mul(L, C, mod), mod)
    return OrdinaryProjector(data, P, W, L, Uord_inv, r)


@lru_cache(maxsize=16)
def _projector_cached(p, k, d, Q, M):
    data = up_matrix(p, k, d, Q, M)
    return ordinary_projector_matrix(data)


def get_projector(p: int, k: int, d: int, Q: int, M: int) -> OrdinaryProjector:
    return _projector_cached(p, k, d, Q, M)


@dataclass
class ProjectionResult:
    form: QExpansion
    certified: int
    residual_valuation: int
    coords: list


def ordinary_project(F: QExpansion, proj: OrdinaryProjector, pre_up: int = 1,
                     min_digits: int = 1) -> ProjectionResult:
    """e_ord F = U^{-s} e_ord(U^s F), computed in Katz coordinates.

    The output carries M = certified digits: the minimum of the working
    precision, the residual valuation of U^s F against the truncated basis and
    the truncation valuation of the U-matrix.
    """
    data = proj.data
    p, d, M = data.p, data.d, data.M
    if F.weight is not None and F.weight != data.k:
        raise WeightMismatch(f"form of weight {F.weight} projected in weight {data.k}")
    mod = p**M
    G = F.reduce(min(F.M, M))
    for _ in range(pre_up):
        G = up_operator(G)
    if G.Q < d:
        raise QPrecisionExhausted(f"input needs at least {d * p**pre_up} coefficients")
    y = coordinates(G, data.basis, d)
    y = [c % mod for c in y]
    rv = residual_valuation(G, data.basis, y, min(G.Q, data.Q))
    if rv < min_digits:
        raise NotInSpan(rv, min_digits)
    x = mat_vec(proj.P, y, mod)
    if pre_up:
        c = mat_vec(proj.L, x, mod)
        c = mat_vec(mat_pow(proj.Uord_inv, pre_up, mod), c, mod)
        x = mat_vec(proj.W, c, mod)
    cert = min(M, G.M, rv, data.trunc_valuation)
    out = [0] * data.Q
    for j, c in enumerate(x):
        if c:
            e = data.basis[j].coeffs
            for n in range(data.Q):
                out[n] += c * e[n]
    form = QExpansion([v % p**cert for v in out], p, max(cert, 1), weight=data.k, level=p)
    return ProjectionResult(form, cert, rv, x)


def ordinary_projector(F: QExpansion, data: UpMatrixData, pre_up: int = 1) -> QExpansion:
    proj = ordinary_projector_matrix(data)
    return ordinary_project(F, proj, pre_up).form


# --- eigenforms --------------------------------------------------------------------


@dataclass
class EigenformData:
    f: QExpansion
    k: int
    a_p: PadicElem
    eps_p: PadicElem
    alpha: PadicElem
    beta: PadicElem
    label: str = ""

    @property
    def ordinary(self) -> bool:
        return self.alpha.val == 0

    def stabilized(self, Q: int | None = None) -> QExpansion:
        """f - beta V f (U-eigenvalue alpha)."""
        f = self.f if Q is None else self.f.truncate(Q)
        g = f - v_operator(f).scale(self.beta)
        return g._like(g.coeffs, level=f.level * f.p)


def eigenform_data(f: QExpansion, a_p: PadicElem | None = None, label: str = "") -> EigenformData:
    p, M, k = f.p, f.M, f.weight
    if a_p is None:
        if f.coeffs[1] % p:
            a_p = f[p] / f[1]
        else:
            raise ValueError("normalised eigenform expected (a_1 a unit)")
    eps = PadicElem.from_int(f.eps_p, p, M)
    alpha, beta = hecke_roots(a_p, f.eps_p, k, p, M)
    return EigenformData(f, k, a_p, eps, alpha, beta, label)


def _exact_series_mul(a, b, Q):
    out = [0] * Q
    for i, x in enumerate(a[:Q]):
        if x:
            for j in range(Q - i):
                out[i + j] += x * b[j]
    return out


@lru_cache(maxsize=None)
def victor_miller_exact(k: int, Q: int) -> tuple:
    """Victor Miller basis over Z (small Q only)."""
    from .qexp import _vm_factor, bernoulli

    d = dim_mk(k)
    if d == 0:
        return ()

    def eis(w):
        c = Fraction(-2 * w) / bernoulli(w)
        assert c.denominator == 1
        s = [0] * Q
        for dd in range(1, Q):
            for n in range(dd, Q, dd):
                s[n] += dd ** (w - 1)
        return [1] + [int(c) * x for x in s[1:]]

    E4, E6 = eis(4), eis(6)
    eta = [0] * Q
    j = 0
    while True:
        hit = False
        for jj in ((j, -j) if j else (0,)):
            e = jj * (3 * jj - 1) // 2
            if e < Q:
                eta[e] = (-1) ** (jj % 2)
                hit = True
        if not hit and j:
            break
        j += 1
    D = [1] + [0] * (Q - 1)
    for _ in range(24):
        D = _exact_series_mul(D, eta, Q)
    D = [0] + D[: Q - 1]
    F = []
    for j in range(d):
        a, b = _vm_factor(k - 12 * j)
        v = [1] + [0] * (Q - 1)
        for _ in range(j):
            v = _exact_series_mul(v, D, Q)
        for _ in range(a):
            v = _exact_series_mul(v, E4, Q)
        for _ in range(b):
            v = _exact_series_mul(v, E6, Q)
        F.append(v)
    m = {}
    for i in range(d - 1, -1, -1):
        vec = list(F[i])
        for jj in range(i + 1, d):
            c = vec[jj]
            if c:
                vec = [x - c * y for x, y in zip(vec, m[jj])]
        m[i] = vec
    return tuple(tuple(m[i]) for i in range(d))


def hecke_matrix_exact(k: int, ell: int = 2) -> list:
    """Matrix of T_ell on the cuspidal Victor Miller basis m_1..m_{d-1}, over Z."""
    d = dim_mk(k)
    Q = ell * d + 2
    vm = victor_miller_exact(k, Q)
    cusp = vm[1:]
    n = len(cusp)
    cols = []
    for f in cusp:
        Tf = [f[ell * i] + (ell ** (k - 1) * f[i // ell] if i % ell == 0 else 0) for i in range(d)]
        # coordinates on m_1.. m_{d-1}: coefficient of q^i for i = 1..d-1
        cols.append([Tf[i] for i in range(1, d)])
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _kernel_vector(B, p, mod):
    """Nonzero kernel vector of a matrix of corank 1 mod p, lifted mod p^M."""
    n = len(B)
    M = [row[:] for row in B]
    pivcols, r = [], 0
    where = [-1] * n
    for c in range(n):
        piv = next((i for i in range(r, n) if M[i][c] % p), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, mod)
        M[r] = [x * inv % mod for x in M[r]]
        for i in range(n):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(x - f * y) % mod for x, y in zip(M[i], M[r])]
        where[c] = r
        pivcols.append(c)
        r += 1
    free = [c for c in range(n) if where[c] < 0]
    if len(free) != 1:
        raise MultiplicityNotOne(f"eigenspace has dimension {len(free)} mod p")
    fc = free[0]
    v = [0] * n
    v[fc] = 1
    for c in pivcols:
        v[c] = (-M[where[c]][fc]) % mod
    # rows beyond rank must vanish (B has corank exactly one)
    for i in range(r, n):
        if any(x % mod for x in M[i]):
            raise MultiplicityNotOne("eigenvector does not lift")
    return v


def level1_eigenforms(k: int, ctx: PadicCtx, Q: int) -> list[EigenformData]:
    """Normalised cuspidal Hecke eigenforms of level 1 and weight k over Z_p.

    Requires the T_2 characteristic polynomial to split into distinct roots mod p.
    """
    p = ctx.p
    mod = ctx.modulus
    T = hecke_matrix_exact(k, 2)
    n = len(T)
    if n == 0:
        return []
    cp = charpoly(T)  # highest first
    low_first = list(reversed(cp))
    rts = roots_mod_p(low_first, p)
    if len(rts) != n:
        raise MultiplicityNotOne(f"T_2 eigenvalues are not distinct and rational mod {p}")
    vm = victor_miller(k, ctx, Q)
    out = []
    for idx, r0 in enumerate(rts):
        lam = hensel_lift(low_first, r0, ctx).residue
        B = [[(T[i][j] - (lam if i == j else 0)) % mod for j in range(n)] for i in range(n)]
        v = _kernel_vector(B, p, mod)
        if v[0] % p == 0:
            raise MultiplicityNotOne("eigenvector has a_1 = 0 mod p")
        inv = pow(v[0], -1, mod)
        v = [x * inv % mod for x in v]
        f = QExpansion.zero(ctx, Q, weight=k)
        for c, m in zip(v, vm[1:]):
            f = f + m.scale(c)
        out.append(eigenform_data(f, label=f"f{idx}"))
    return out


def eisenstein_data(k: int, ctx: PadicCtx, Q: int) -> EigenformData:
    """E_k (constant term 1) as an ordinary eigenform: alpha = 1, beta = p^{k-1}."""
    p, M = ctx.p, ctx.M
    one = PadicElem.from_int(1, p, M)
    return EigenformData(eisenstein(k, ctx, Q), k, PadicElem.from_int(1 + p ** (k - 1), p, M), one, one,
                         PadicElem.exact_power(p, k - 1, M), "E")


@lru_cache(maxsize=32)
def _ordinary_eigenbasis_cached(k, p, M, Q):
    ctx = PadicCtx(p, M)
    datas = [eisenstein_data(k, ctx, Q)]
    datas += [fd for fd in level1_eigenforms(k, ctx, Q) if fd.ordinary]
    return tuple(datas), tuple(d.stabilized() for d in datas)


def ordinary_eigenbasis(k: int, ctx: PadicCtx, Q: int):
    """Unit-root stabilisations spanning the ordinary subspace of weight k >= 4.

    Returns (datas, forms), the Eisenstein member first.
    """
    datas, forms = _ordinary_eigenbasis_cached(k, ctx.p, ctx.M, Q)
    return list(datas), list(forms)


def _is_eisenstein(f: EigenformData) -> bool:
    return f.label == "E" or f.f.coeffs[0] % f.f.p != 0


def eigen_coefficient(G: QExpansion, f: EigenformData, M: int | None = None) -> PadicElem:
    """Coefficient of f^alpha when G is written in the ordinary eigenbasis of weight f.k.

    Normalised so that the functional is 1 on f^alpha (as stored in ``f``). ``M``
    lowers the working precision (used when G lives at a congruent weight).
    """
    if not f.ordinary:
        raise NotOrdinary("eigen_coefficient needs an ordinary eigenform")
    p = G.p
    M = min(G.M, f.f.M, M or G.M)
    Q = min(G.Q, f.f.Q)
    datas, forms = ordinary_eigenbasis(f.k, PadicCtx(p, M), Q)
    if _is_eisenstein(f):
        target = 0
    else:
        mod = p**M
        target = next((i for i, d in enumerate(datas) if i and all(
            (d.f.coeffs[n] - f.f.coeffs[n]) % mod == 0 for n in range(1, min(Q, 12)))), None)
        if target is None:
            raise NotOrdinary("f is not among the ordinary eigenforms of its weight")
    scale = f.f.coeffs[0] if target == 0 else f.f.coeffs[1]
    c = _solve_coefficient(G.reduce(M), forms, target)
    if scale % p**M != 1:
        c = c / PadicElem.from_int(scale, p, M)
    return c


def _solve_coefficient(G: QExpansion, forms, target: int) -> PadicElem:
    p, M = G.p, G.M
    mod = p**M
    r = len(forms)
    Q = min(G.Q, min(f.Q for f in forms))
    cols = [[f.coeffs[n] % mod for f in forms] for n in range(Q)]
    rows = independent_columns([list(x) for x in zip(*cols)], p)
    if len(rows) < r:
        raise MultiplicityNotOne("ordinary eigenforms are linearly dependent mod p")
    B = [cols[n] for n in rows[:r]]
    c = mat_vec(mat_inv(B, p, mod), [G.coeffs[n] for n in rows[:r]], mod)
    return PadicElem.from_int(c[target], p, M)


# --- Euler factors and L-values --------------------------------------------------------


@dataclass
class EulerFactors:
    c: int
    E: PadicElem
    E0: PadicElem
    E1: PadicElem


def euler_factors(f: EigenformData, g: EigenformData, h: EigenformData, k: int, l: int, m: int,
                  M: int | None = None) -> EulerFactors:
    if (k + l + m) % 2:
        raise NotUnbalanced("k + l + m must be even")
    if k < l + m:
        raise NotUnbalanced("need k >= l + m")
    p = f.a_p.p
    M = M or f.alpha.prec
    big = M + 2 * (k + l + m)
    c = (k + l + m - 2) // 2
    pc = PadicElem.exact_power(p, -c, big)
    one = PadicElem.from_int(1, p, big)
    E = one
    for xg in (g.alpha, g.beta):
        for xh in (h.alpha, h.beta):
            E = E * (one - f.beta * xg * xh * pc)
    E0, E1 = f_euler_factors(f, big)
    return EulerFactors(c, *(x.with_prec(min(M, x.prec)) for x in (E, E0, E1)))


def f_euler_factors(f: EigenformData, M: int | None = None) -> tuple[PadicElem, PadicElem]:
    """(1 - beta^2 eps^{-1} p^{1-k}, 1 - beta^2 eps^{-1} p^{-k})."""
    p, k = f.a_p.p, f.k
    M = M or f.alpha.prec
    big = M + 2 * k
    one = PadicElem.from_int(1, p, big)
    b2e = f.beta * f.beta / f.eps_p
    E0 = one - b2e * PadicElem.exact_power(p, 1 - k, big)
    E1 = one - b2e * PadicElem.exact_power(p, -k, big)
    return E0.with_prec(min(M, E0.prec)), E1.with_prec(min(M, E1.prec))


def rankin_cohen(F: QExpansion, kF: int, G: QExpansion, kG: int, n: int, theta_F=None) -> QExpansion:
    """[F, G]_n = sum_{r+s=n} (-1)^r C(n+kF-1, s) C(n+kG-1, r) Theta^r F Theta^s G.

    ``theta_F(r)`` may supply Theta^r F by another route (e.g. nabla_chi).
    """
    tf = theta_F or (lambda r: theta_power(F, r))
    out = None
    for r in range(n + 1):
        s = n - r
        coef = (-1) ** r * math.comb(n + kF - 1, s) * math.comb(n + kG - 1, r)
        a, b = tf(r), theta_power(G, s)
        term = (a._like(a.coeffs, weight=None) * b._like(b.coeffs, weight=None)).scale(coef)
        out = term if out is None else out + term
    return out._like(out.coeffs, weight=kF + kG + 2 * n)


def rc_constant(kF: int, kG: int, t: int) -> int:
    """Theta^t F * G = [F, G]_t / rc_constant modulo the image of Theta."""
    return (-1) ** t * math.comb(2 * t + kF + kG - 2, t)


@dataclass
class LValue:
    value: PadicElem
    route_b: PadicElem
    t: int | None
    certified: int
    weight: int
    euler: EulerFactors | None = None
    zero_eisenstein: bool = False
    projection: QExpansion | None = None

    @property
    def routes_agree(self) -> bool:
        return (self.value - self.route_b).residue % self.value.p ** self.certified == 0


def katz_plan(p: int, k: int, digits: int) -> int:
    """Basis size whose truncation certificate reaches ``digits``."""
    # (p I - (I-1))/(p+1) - 1 >= digits for I levels
    I = max(1, math.ceil(Fraction((digits + 1) * (p + 1) - 1, p - 1)))
    return dim_mk(k + (I - 1) * (p - 1))


@dataclass
class ValuePlan:
    """Precision plan for one L-value: working digits, Katz size, U pre-applications."""

    M: int
    d: int | None = None
    pre_up: int = 1
    route: str = "rc"  # "rc" (Rankin-Cohen) or "nearly" (graded-factor projection)


def _project_value(F, kF, G, kG, t, f: EigenformData, plan: ValuePlan, theta_F, weight_M=None):
    """lambda_f(e_ord(Theta^t F * G)) through an overconvergent representative."""
    p, M = F.p, plan.M
    k = kF + kG + 2 * t
    d = plan.d or katz_plan(p, k, M)
    Qb = p * d
    Qin = Qb * p**plan.pre_up
    if F.Q < Qin or G.Q < Qin:
        raise QPrecisionExhausted(f"inputs need {Qin} coefficients, have {min(F.Q, G.Q)}")
    F, G = F.truncate(Qin).reduce(M), G.truncate(Qin).reduce(M)
    th = (lambda r: theta_F(r).truncate(Qin).reduce(M)) if theta_F else None
    if plan.route == "nearly":
        from .nearly import oc_representative

        rep, const = oc_representative(F, kF, G, kG, t, th)
    else:
        rep, const = rankin_cohen(F, kF, G, kG, t, th), rc_constant(kF, kG, t)
    proj = get_projector(p, k, d, Qb, M)
    res = ordinary_project(rep, proj, plan.pre_up)
    cert = res.certified
    if weight_M is not None:
        cert = min(cert, weight_M)
    val = eigen_coefficient(res.form, f, cert)
    lost = vp(const, p)
    val = val / PadicElem.from_int(const, p, cert + lost)
    cert = max(0, cert - lost)
    return val.with_prec(min(val.prec, cert + val.val if val.val < 0 else cert)), cert, res.form


def triple_product_value(f: EigenformData, g: EigenformData, h: EigenformData,
                         plan: ValuePlan | None = None) -> LValue:
    """lambda_f(e_ord(Theta^t(g^[p]) * h^alpha)), t = (k - l - m)/2, by two routes."""
    k, l, m = f.k, g.k, h.k
    if (k + l + m) % 2 or k < l + m:
        raise NotUnbalanced(f"weights ({k},{l},{m}) are not unbalanced at f")
    if not f.ordinary:
        raise NotOrdinary("f must be ordinary")
    t = (k - l - m) // 2
    p = f.f.p
    plan = plan or ValuePlan(M=f.f.M)
    ctx = PadicCtx(p, plan.M)
    ef = euler_factors(f, g, h, k, l, m, plan.M)
    ga, ha = g.stabilized(), h.stabilized()
    val_a, cert_a, form = _project_value(deplete(ga), l, ha, m, t, f, plan, None)

    def theta_b(r):
        return nabla_chi(LocAnChar.power(r, ctx), ga)

    val_b, cert_b, _ = _project_value(ga, l, ha, m, t, f, plan, theta_b)
    return LValue(val_a, val_b, t, min(cert_a, cert_b), k, ef, False, form)


def rankin_value(f: EigenformData, k2: int, h: EigenformData, plan: ValuePlan | None = None,
                 t: int | None = None) -> LValue:
    """lambda_f(e_ord(Theta^t E^[p]_{k2} * h^alpha)) with k1 = k2 + k3 + 2t.

    Passing ``t`` with k2 + k3 + 2t != k1 evaluates at a weight congruent to k1
    modulo (p-1)p^i; the value is then certified to i+1 digits.
    """
    if not f.ordinary:
        raise NotOrdinary("f must be ordinary")
    p = f.f.p
    k1, k3 = f.k, h.k
    plan = plan or ValuePlan(M=f.f.M)
    ctx = PadicCtx(p, plan.M)
    if k2 % 2:
        # level 1: zeta^d + (-1)^{k2} zeta^{-d} vanishes identically
        zero = PadicElem.from_int(0, p, plan.M)
        return LValue(zero, zero, t, plan.M, k1, None, True, None)
    if t is None:
        if (k1 - k2 - k3) % 2 or k1 < k2 + k3:
            raise NotUnbalanced(f"k1={k1} is not k2 + k3 + 2t with t >= 0")
        t = (k1 - k2 - k3) // 2
    w = k2 + k3 + 2 * t
    weight_M = None
    if w != k1:
        if (w - k1) % (p - 1):
            raise WeightMismatch(f"weight {w} is not congruent to {k1} mod {p - 1}")
        weight_M = vp(w - k1, p) + 1
    d = plan.d or katz_plan(p, w, weight_M or plan.M)
    Qin = p * d * p**plan.pre_up
    E = eis_family_specialize(k2, ctx, Qin)
    ha = h.stabilized(Qin)

    def theta_b(r):
        return nabla_chi(LocAnChar.power(r, ctx), E)

    sub = ValuePlan(plan.M, d, plan.pre_up, plan.route)
    val_a, cert_a, form = _project_value(E, k2, ha, k3, t, f, sub, None, weight_M)
    val_b, cert_b, _ = _project_value(E, k2, ha, k3, t, f, sub, theta_b, weight_M)
    return LValue(val_a, val_b, t, min(cert_a, cert_b), w, None, False, form)


# --- ordinary projection by direct U-iteration on q-coefficients -------------------
#
# For inputs far from small weight the Katz basis is too large.  Since
# lambda_f(U^N G) = alpha_f^N lambda_f(G) and U^N G is ordinary modulo p^e
# once N is large, only the coefficients of G at multiples of p^N are needed.


def _powmod_array(base, e: int, mod: int):
    import numpy as np

    out = np.ones_like(base) % mod
    b = base % mod
    while e:
        if e & 1:
            out = out * b % mod
        e >>= 1
        if e:
            b = b * b % mod
    return out


def divisor_sum_array(kminus1: int, n: int, mod: int, skip_p: int | None = None):
    """sum_{d | m, p !| d} d^{k-1} for m < n (m with p | m zeroed when skip_p)."""
    import numpy as np

    if mod >= 3 * 10**9:
        raise ValueError("numpy sieve needs p^e < 3e9")
    d = np.arange(n, dtype=np.int64)
    w = _powmod_array(d, kminus1, mod)
    out = np.zeros(n, dtype=np.int64)
    for a in range(1, n):
        if skip_p and a % skip_p == 0:
            continue
        out[a::a] += w[a]
        if a % 64 == 0:
            out %= mod
    out %= mod
    if skip_p:
        out[::skip_p] = 0
    return out


def eisenstein_array(k: int, n: int, p: int, e: int):
    """Coefficients of E_k (constant term 1) below n, mod p^e."""
    from .qexp import NonIntegralEisenstein, bernoulli

    c = Fraction(-2 * k) / bernoulli(k)
    mod = p**e
    if c.denominator % p == 0:
        raise NonIntegralEisenstein(f"E_{k} is not p-integral at p={p}")
    cm = c.numerator * pow(c.denominator, -1, mod) % mod
    arr = divisor_sum_array(k - 1, n, mod) * cm % mod
    arr[0] = 1
    return arr


@dataclass
class IteratedValue:
    value: PadicElem
    certified: int
    N: int
    residual_valuation: int


def iterated_ordinary_coefficient(G_at, f: EigenformData, e: int, N: int, R: int = 16) -> IteratedValue:
    """lambda_f(e_ord G) from the coefficients of U^N G, mod p^e.

    ``G_at(indices)`` returns G's coefficients (mod p^e) at the given indices.
    U^N G is fitted against the weight-f.k ordinary eigenbasis on the first R
    indices; the fit residual certifies that U^N G is ordinary to that depth.
    """
    p = f.f.p
    mod = p**e
    idx = [r * p**N for r in range(R)]
    c = [int(x) % mod for x in G_at(idx)]
    datas, forms = ordinary_eigenbasis(f.k, PadicCtx(p, e), R)
    if _is_eisenstein(f):
        target = 0
    else:
        target = next((i for i, d in enumerate(datas) if i and all(
            (d.f.coeffs[n] - f.f.coeffs[n]) % mod == 0 for n in range(1, min(R, 12)))), None)
        if target is None:
            raise NotOrdinary("f is not among the ordinary eigenforms of its weight")
    r = len(forms)
    cols = [[fm.coeffs[n] % mod for fm in forms] for n in range(R)]
    rows = independent_columns([list(x) for x in zip(*cols)], p)[:r]
    if len(rows) < r:
        raise MultiplicityNotOne("ordinary eigenforms are linearly dependent mod p")
    x = mat_vec(mat_inv([cols[n] for n in rows], p, mod), [c[n] for n in rows], mod)
    resid = [(c[n] - sum(a * b for a, b in zip(cols[n], x))) % mod for n in range(R)]
    rv = min((_val(v, p, e) for v in resid), default=e)
    # coefficient of f^alpha in U^N G is alpha^N times that in e_ord G
    alpha_N = f.alpha.with_prec(e) ** N
    scale = f.f.coeffs[0] if target == 0 else f.f.coeffs[1]
    val = PadicElem.from_int(x[target], p, e) / alpha_N / PadicElem.from_int(scale, p, e)
    return IteratedValue(val.with_prec(min(val.prec, rv)), rv, N, rv)


def _product_at(Fv, Hv, idx, mod):
    """Coefficients of F*H at the given indices from coefficient arrays."""
    import numpy as np

    out = []
    for m in idx:
        if m == 0:
            out.append(int(Fv[0]) * int(Hv[0]) % mod)
            continue
        a = Fv[: m + 1]
        b = Hv[m::-1]
        s = 0
        step = 1 << 12
        for i in range(0, m + 1, step):
            s += int(np.dot(a[i:i + step] % mod, b[i:i + step] % mod) % mod)
        out.append(s % mod)
    return out


def rankin_value_iterated(f: EigenformData, k2: int, h_k: int, t: int, e: int, N: int | None = None,
                          R: int = 12, route: str = "theta") -> IteratedValue:
    """rankin_value for h = E_{h_k} by direct U-iteration, mod p^e.

    route "theta" weights E^[p]_{k2} by a^t; route "chi" by chi(a) for the
    character x -> x^t, tabulated on (Z/p^e)^x.
    """
    import numpy as np

    p = f.f.p
    mod = p**e
    N = e + 1 if N is None else N
    if k2 % 2:
        zero = PadicElem.from_int(0, p, e)
        return IteratedValue(zero, e, N, e)
    n = R * p**N
    Ep = divisor_sum_array(k2 - 1, n, mod, skip_p=p) * 2 % mod
    if route == "theta":
        w = _powmod_array(np.arange(n, dtype=np.int64), t, mod)
    else:
        chi = LocAnChar.power(t, PadicCtx(p, e))
        table = np.zeros(mod, dtype=np.int64)
        for a in range(mod):
            if a % p:
                table[a] = chi(a).residue
        w = table[np.arange(n, dtype=np.int64) % mod]
    Fv = Ep * w % mod
    H = eisenstein_array(h_k, n, p, e)
    # unit-root stabilisation E - p^{k-1} V E
    beta = pow(p, h_k - 1, mod)
    Hs = H.copy()
    Hs[::p] = (Hs[::p] - beta * H[: len(Hs[::p])]) % mod
    return iterated_ordinary_coefficient(lambda idx: _product_at(Fv, Hs, idx, mod), f, e, N, R)
