"""Characteristic series of U_p on the Katz basis at two precision levels,
with the certified digits of each coefficient and whether they agree."""

import argparse

from padic_gm.lfun import up_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--k", type=int, nargs="+", default=[0, 12])
    ap.add_argument("--dims", type=int, nargs="+", default=[4, 6, 8, 10])
    ap.add_argument("--prec", type=int, default=8)
    a = ap.parse_args()
    p = a.p
    for k in a.k:
        for d in a.dims:
            lo = up_matrix(p, k, d, p * d, a.prec)
            hi = up_matrix(p, k, d + 2, 2 * p * d, a.prec + 2)
            for n in range(d + 1):
                digits = min(lo.char_certified[n], hi.char_certified[n])
                agree = (lo.charseries[n] - hi.charseries[n]) % p**digits == 0 if digits else True
                print(f"k={k} d={d} n={n} coeff={lo.charseries[n] % p**a.prec} "
                      f"certified={digits} agree={agree}")


if __name__ == "__main__":
    main()
