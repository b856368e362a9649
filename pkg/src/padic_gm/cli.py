"""Command-line front end.

All numeric output is QEXP / NHOC text or ``key=value`` lines.  Exit codes:
0 success, 1 invalid input, 2 precision exhausted, 3 mathematical precondition.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .errors import MathPreconditionError, NotUnbalanced, PrecisionError
from .padic import PadicCtx, PadicElem, is_prime


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _prime(s: str) -> int:
    p = int(s)
    if not is_prime(p):
        raise argparse.ArgumentTypeError(f"{s} is not prime")
    return p


def _positive(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError(f"{s} must be positive")
    return n


def fmt(x: PadicElem) -> str:
    """Residue mod p^prec for integral elements, ``u/p^e`` otherwise."""
    if x.val >= 0:
        return str(x.residue)
    return f"{x.unit}/{x.p}^{-x.val}"


def _read_qexp(stream):
    from .qexp import parse_qexp

    try:
        return parse_qexp(stream.read())
    except (ValueError, KeyError, IndexError) as exc:
        raise ValidationError(f"bad QEXP input: {exc}") from exc


# --- handlers ---------------------------------------------------------------------


def cmd_mahler(a, out):
    from .mahler import finite_difference_coeffs, growth_sup

    ctx = PadicCtx(a.p, a.prec)
    with open(a.samples) as fh:
        toks = fh.read().split()
    try:
        vals = [Fraction(t) for t in toks]
    except ValueError as exc:
        raise ValidationError(f"bad sample: {exc}") from exc
    if not vals:
        raise ValidationError("no samples")
    f = finite_difference_coeffs(vals, ctx)
    for k, c in enumerate(f.coeffs):
        out.write(f"{k} {fmt(c)}\n")
    if a.eps is not None:
        g = growth_sup(f, Fraction(a.eps))
        out.write(f"gauge eps={g.eps} sup_exponent={g.sup_exponent} argmax={g.argmax}\n")


def cmd_nu_table(a, out):
    from .mahler import nu_exponent, rho_bruteforce

    if a.n > 8:
        raise ValidationError("n <= 8 keeps the brute-force check tractable")
    for m in range(1, a.n + 1):
        nu = nu_exponent(a.n, m, a.p)
        ok = "ok" if rho_bruteforce(a.n, m, a.p) == nu else "FAIL"
        out.write(f"m={m} nu={nu} rho_check={ok}\n")


def _qexp_filter(fn):
    def handler(a, out):
        f = _read_qexp(sys.stdin if a.input == "-" else open(a.input))
        out.write(fn(f, a).to_text())
    return handler


def _theta(f, a):
    from .qexp import theta_power

    return theta_power(f, a.t)


def _deplete(f, a):
    from .qexp import deplete

    return deplete(f)


def _up(f, a):
    from .qexp import up_operator

    return up_operator(f)


def _nabla_chi(f, a):
    from .mahler import LocAnChar
    from .qexp import nabla_chi

    chi = LocAnChar(a.tame, a.wild, PadicCtx(f.p, f.M))
    return nabla_chi(chi, f)


def _stabilize(f, a):
    from .qexp import p_stabilize

    g, eig, other = p_stabilize(f, a.root)
    sys.stderr.write(f"eigenvalue={fmt(eig)} other_root={fmt(other)}\n")
    return g


def cmd_eis(a, out):
    from .qexp import eisenstein

    out.write(eisenstein(a.k, PadicCtx(a.p, a.prec), a.qprec).to_text())


def cmd_eis_family(a, out):
    from .qexp import eis_family_specialize

    out.write(eis_family_specialize(a.k2, PadicCtx(a.p, a.prec), a.qprec, a.N).to_text())


def cmd_up_matrix(a, out):
    from .lfun import up_matrix

    data = up_matrix(a.p, a.k, a.dim, a.qprec, a.prec)
    out.write(f"p={a.p} k={a.k} d={a.dim} Q={a.qprec} M={a.prec} trunc_valuation={data.trunc_valuation}\n")
    out.write("levels " + " ".join(map(str, data.levels)) + "\n")
    for i, row in enumerate(data.A):
        out.write(f"row {i} " + " ".join(map(str, row)) + "\n")
    for n, (c, cert) in enumerate(zip(data.charseries, data.char_certified)):
        out.write(f"char n={n} coeff={c % a.p**cert if cert else 0} certified={cert}\n")


def cmd_ordinary_project(a, out):
    from .lfun import get_projector, katz_plan, ordinary_project

    f = _read_qexp(sys.stdin if a.input == "-" else open(a.input))
    if f.weight is None:
        raise ValidationError("ordinary-project needs a weight tag k=")
    d = a.dim or katz_plan(f.p, f.weight, f.M)
    proj = get_projector(f.p, f.weight, d, f.p * d, f.M)
    res = ordinary_project(f, proj, a.pre_up)
    sys.stderr.write(f"certified={res.certified} residual_valuation={res.residual_valuation} rank={proj.rank}\n")
    out.write(res.form.to_text())


def _eigen_of_weight(k, ctx, Q, index, ordinary=False):
    from .lfun import eisenstein_data, level1_eigenforms

    forms = level1_eigenforms(k, ctx, Q) if k >= 12 else []
    if ordinary:
        forms = [f for f in forms if f.ordinary]
    if not forms:
        if ordinary:
            from .errors import NotOrdinary

            raise NotOrdinary(f"no ordinary cusp eigenform of weight {k} at p={ctx.p}")
        return eisenstein_data(k, ctx, Q)
    if index >= len(forms):
        raise ValidationError(f"weight {k} has {len(forms)} eigenforms")
    return forms[index]


def cmd_triple_value(a, out):
    from .lfun import ValuePlan, katz_plan, triple_product_value

    if (a.k + a.l + a.m) % 2 or a.k < a.l + a.m:
        raise NotUnbalanced(f"weights ({a.k},{a.l},{a.m}) are not unbalanced at f")
    ctx = PadicCtx(a.p, a.prec)
    Q = katz_plan(a.p, a.k, a.prec) * a.p * a.p
    f = _eigen_of_weight(a.k, ctx, Q, a.f_index, ordinary=True)
    g = _eigen_of_weight(a.l, ctx, Q, 0)
    h = _eigen_of_weight(a.m, ctx, Q, 0)
    r = triple_product_value(f, g, h, ValuePlan(M=a.prec, route=a.route))
    ef = r.euler
    out.write(f"value={fmt(r.value)}\nroute_b={fmt(r.route_b)}\nroutes_agree={r.routes_agree}\n")
    out.write(f"t={r.t}\nc={ef.c}\nE={fmt(ef.E)}\nE0={fmt(ef.E0)}\nE1={fmt(ef.E1)}\ncertified={r.certified}\n")


def cmd_rankin_value(a, out):
    from .lfun import ValuePlan, f_euler_factors, katz_plan, rankin_value

    ctx = PadicCtx(a.p, a.prec)
    Q = katz_plan(a.p, a.k1, a.prec) * a.p * a.p
    f = _eigen_of_weight(a.k1, ctx, Q, a.f_index, ordinary=True)
    h = _eigen_of_weight(a.k3, ctx, Q, 0)
    r = rankin_value(f, a.k2, h, ValuePlan(M=a.prec, route=a.route))
    out.write(f"value={fmt(r.value)}\nroute_b={fmt(r.route_b)}\nroutes_agree={r.routes_agree}\n")
    out.write(f"t={'-' if r.t is None else r.t}\nzero_eisenstein={r.zero_eisenstein}\n")
    # only the factors attached to f are defined for the Rankin value
    E0, E1 = f_euler_factors(f, a.prec)
    out.write(f"E0={fmt(E0)}\nE1={fmt(E1)}\n")
    out.write(f"certified={r.certified}\n")


def cmd_nabla_vector(a, out):
    from .nearly import nabla_vector, parse_nhoc

    F = parse_nhoc((sys.stdin if a.input == "-" else open(a.input)).read())
    out.write(nabla_vector(F).to_text())


def cmd_oc_project(a, out):
    from .nearly import oc_projection, parse_nhoc

    F = parse_nhoc((sys.stdin if a.input == "-" else open(a.input)).read())
    out.write(oc_projection(F).to_text())


def cmd_selftest(a, out):
    from .selftest import run_selftest

    return run_selftest(out, module=a.module, fast=a.fast)


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="padic-gm", description="p-adic operator calculus on modular forms")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("mahler", help="Mahler coefficients from samples f(0..K-1)")
    s.add_argument("--p", type=_prime, required=True)
    s.add_argument("--prec", type=_positive, required=True)
    s.add_argument("--samples", required=True)
    s.add_argument("--eps", default=None, help="also print the growth gauge at this eps")
    s.set_defaults(fn=cmd_mahler)

    s = sub.add_parser("nu-table", help="nu_{n,m} with a brute-force rho check")
    s.add_argument("--p", type=_prime, required=True)
    s.add_argument("--n", type=_positive, required=True)
    s.set_defaults(fn=cmd_nu_table)

    def qexp_cmd(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--input", default="-")
        s.set_defaults(fn=_qexp_filter(fn))
        return s

    qexp_cmd("theta", _theta, "Atkin-Serre Theta^t").add_argument("--t", type=int, default=1)
    qexp_cmd("deplete", _deplete, "remove coefficients with p | n")
    qexp_cmd("up", _up, "U_p")
    s = qexp_cmd("nabla-chi", _nabla_chi, "a_n -> chi(n) a_n on units, 0 on p | n")
    s.add_argument("--tame", type=int, required=True)
    s.add_argument("--wild", type=int, required=True)
    qexp_cmd("stabilize", _stabilize, "p-stabilisation f - other * V f").add_argument(
        "--root", choices=["unit", "nonunit"], default="unit")

    s = sub.add_parser("eis", help="E_k with constant term 1")
    s.add_argument("--p", type=_prime, required=True)
    s.add_argument("--prec", type=_positive, default=10)
    s.add_argument("--qprec", type=_positive, default=20)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(fn=cmd_eis)

    s = sub.add_parser("eis-family", help="specialisation E^[p]_{k2} of the Eisenstein family")
    s.add_argument("--p", type=_prime, required=True)
    s.add_argument("--prec", type=_positive, default=10)
    s.add_argument("--qprec", type=_positive, default=20)
    s.add_argument("--k2", type=int, required=True)
    s.add_argument("--N", type=_positive, default=1)
    s.set_defaults(fn=cmd_eis_family)

    s = sub.add_parser("up-matrix", help="U_p on the Katz basis and its characteristic series")
    s.add_argument("--p", type=_prime, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--dim", type=_positive, required=True)
    s.add_argument("--qprec", type=_positive, required=True)
    s.add_argument("--prec", type=_positive, required=True)
    s.set_defaults(fn=cmd_up_matrix)

    s = sub.add_parser("ordinary-project", help="e_ord of a level-1 (or level-p) form")
    s.add_argument("--input", default="-")
    s.add_argument("--dim", type=_positive, default=None)
    s.add_argument("--pre-up", type=int, default=1)
    s.set_defaults(fn=cmd_ordinary_project)

    for name, fn, ws in (("triple-value", cmd_triple_value, ("k", "l", "m")),
                         ("rankin-value", cmd_rankin_value, ("k1", "k2", "k3"))):
        s = sub.add_parser(name)
        s.add_argument("--p", type=_prime, required=True)
        for w in ws:
            s.add_argument(f"--{w}", type=int, required=True)
        s.add_argument("--prec", type=_positive, default=6)
        s.add_argument("--f-index", type=int, default=0, help="which ordinary eigenform of weight k")
        s.add_argument("--route", choices=["rc", "nearly"], default="rc")
        s.set_defaults(fn=fn)

    s = sub.add_parser("nabla-vector", help="nabla on an NHOC filtered form")
    s.add_argument("--input", default="-")
    s.set_defaults(fn=cmd_nabla_vector)
    s = sub.add_parser("oc-project", help="overconvergent projection of an NHOC filtered form")
    s.add_argument("--input", default="-")
    s.set_defaults(fn=cmd_oc_project)

    s = sub.add_parser("selftest", help="run the invariant suites")
    s.add_argument("--module", default=None)
    s.add_argument("--fast", action="store_true")
    s.set_defaults(fn=cmd_selftest)
    return ap


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        rc = args.fn(args, out)
        return int(rc or 0)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except PrecisionError as exc:
        sys.stderr.write(f"precision: {type(exc).__name__}: {exc}\n")
        return 2
    except MathPreconditionError as exc:
        sys.stderr.write(f"precondition: {type(exc).__name__}: {exc}\n")
        return 3
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
