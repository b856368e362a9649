"""Search primes p <= 50 where the weight-24 level-1 eigenforms are defined over
Z_p, distinct mod p, and at least one of them is ordinary."""

import argparse

from padic_gm.errors import MathPreconditionError
from padic_gm.lfun import level1_eigenforms
from padic_gm.padic import PadicCtx, is_prime


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=24)
    ap.add_argument("--pmax", type=int, default=50)
    ap.add_argument("--prec", type=int, default=4)
    a = ap.parse_args()
    for p in range(5, a.pmax + 1):
        if not is_prime(p):
            continue
        try:
            forms = level1_eigenforms(a.k, PadicCtx(p, a.prec), 3 * p)
        except MathPreconditionError as exc:
            print(f"p={p} skip ({type(exc).__name__})")
            continue
        slopes = [f.alpha.valuation for f in forms]
        a_p = [f.a_p.residue % p for f in forms]
        tag = "ANCHOR" if 0 in slopes else "non-ordinary"
        print(f"p={p} a_p_mod_p={a_p} slopes={slopes} {tag}")


if __name__ == "__main__":
    main()
