"""Truncated power series arithmetic on lists of residues mod ``mod``.

Products go through numpy int64 convolutions on base-2^L limbs so that no
intermediate sum overflows; everything else is plain Python ints.
"""

from __future__ import annotations

import numpy as np


def _limb_bits(n: int) -> int:
    # n * 2^(2L) < 2^63
    return max(8, (62 - n.bit_length()) // 2)


def _split(a, L, nlimbs):
    mask = (1 << L) - 1
    out = []
    for i in range(nlimbs):
        shift = i * L
        out.append(np.array([(x >> shift) & mask for x in a], dtype=np.int64))
    return out


def mul(a, b, n: int, mod: int) -> list[int]:
    """First ``n`` coefficients of a*b mod ``mod``."""
    a = a[:n]
    b = b[:n]
    if not a or not b:
        return [0] * n
    la, lb = len(a), len(b)
    if min(la, lb) <= 8 or mod.bit_length() > 400:
        return _mul_naive(a, b, n, mod)
    L = _limb_bits(min(la, lb))
    nl = -(-mod.bit_length() // L)
    A = _split(a, L, nl)
    B = _split(b, L, nl)
    out = [0] * n
    for i in range(nl):
        for j in range(nl):
            c = np.convolve(A[i], B[j])[:n].tolist()
            sh = (i + j) * L
            for t, x in enumerate(c):
                if x:
                    out[t] += x << sh
    return [x % mod for x in out]


def _mul_naive(a, b, n, mod):
    out = [0] * n
    for i, x in enumerate(a):
        if x == 0:
            continue
        lim = min(len(b), n - i)
        for j in range(lim):
            out[i + j] += x * b[j]
    return [x % mod for x in out]


def power(a, e: int, n: int, mod: int) -> list[int]:
    result = [1 % mod] + [0] * (n - 1)
    base = list(a[:n]) + [0] * max(0, n - len(a))
    while e:
        if e & 1:
            result = mul(result, base, n, mod)
        e >>= 1
        if e:
            base = mul(base, base, n, mod)
    return result


def inverse(a, n: int, mod: int) -> list[int]:
    """Inverse of a series whose constant term is a unit mod ``mod``."""
    c0 = pow(a[0], -1, mod)
    b = [c0]
    m = 1
    while m < n:
        m = min(2 * m, n)
        ab = mul(a, b, m, mod)
        # b <- b * (2 - a b)
        t = [(-x) % mod for x in ab]
        t[0] = (t[0] + 2) % mod
        b = mul(b, t, m, mod)
    return b[:n]
