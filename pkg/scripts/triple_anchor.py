"""t = 0 triple-product check: lambda_f(e_ord(Delta^alpha Delta^[p])) against the
Euler-factor formula with the classical coefficient of Delta^2 on f."""

import argparse

from padic_gm.lfun import eigenform_data, katz_plan, level1_eigenforms, triple_product_value
from padic_gm.padic import PadicCtx
from padic_gm.qexp import delta


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=13)
    ap.add_argument("--prec", type=int, default=6)
    a = ap.parse_args()
    ctx = PadicCtx(a.p, a.prec)
    Q = katz_plan(a.p, 24, a.prec) * a.p * a.p
    forms = level1_eigenforms(24, ctx, Q)
    f = next(x for x in forms if x.ordinary)
    other = next(x for x in forms if x is not f)
    D = eigenform_data(delta(ctx, Q))
    r = triple_product_value(f, D, D)
    ef = r.euler
    # Delta^2 = c f + c' f' in S_24; matching a_1 and a_2 gives c = 1/(a_2(f) - a_2(f'))
    c = 1 / (f.f[2] - other.f[2])
    expected = ef.E / (ef.E0 * ef.E1) * c
    mod = a.p**r.certified
    print(f"value={r.value.residue % mod}")
    print(f"route_b={r.route_b.residue % mod}")
    print(f"expected={expected.residue % mod}")
    print(f"E={ef.E.residue} E0={ef.E0.residue} E1={ef.E1.residue} certified={r.certified}")
    print(f"match={(r.value - expected).valuation >= r.certified}")


if __name__ == "__main__":
    main()
