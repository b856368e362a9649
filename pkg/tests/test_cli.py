import io
import subprocess
import sys

import pytest

from padic_gm.cli import run
from padic_gm.nearly import FilteredForm, parse_nhoc
from padic_gm.padic import PadicCtx
from padic_gm.qexp import QExpansion, delta, eisenstein, parse_qexp


def call(argv, stdin_text=None, monkeypatch=None):
    if stdin_text is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    out = io.StringIO()
    code = run(argv, out)
    return code, out.getvalue()


def kv(text):
    return dict(tok.split("=", 1) for line in text.splitlines() for tok in line.split() if "=" in tok)


def test_nu_table():
    code, out = call(["nu-table", "--p", "2", "--n", "3"])
    assert code == 0
    assert out.splitlines() == ["m=1 nu=4 rho_check=ok", "m=2 nu=6 rho_check=ok", "m=3 nu=7 rho_check=ok"]


def test_mahler(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("0 1 4 9 16")
    code, out = call(["mahler", "--p", "5", "--prec", "4", "--samples", str(f)])
    assert code == 0
    assert out.splitlines() == ["0 0", "1 1", "2 2", "3 0", "4 0"]


def test_deplete(monkeypatch):
    text = QExpansion([0, 1, 1, 1], 3, 4).to_text()
    code, out = call(["deplete"], text, monkeypatch)
    assert code == 0
    assert parse_qexp(out).coeffs == [0, 1, 1, 0]


def test_theta_round_trip(monkeypatch):
    E4 = eisenstein(4, PadicCtx(5, 4), 10)
    code, out = call(["theta", "--t", "2"], E4.to_text(), monkeypatch)
    g = parse_qexp(out)
    assert code == 0 and g.coeffs[2] == 2160 * 4 % 625 and g.weight == 8
    assert parse_qexp(g.to_text()) == g


def test_eis_output_is_deterministic():
    a = call(["eis", "--p", "7", "--k", "6", "--qprec", "15"])
    b = call(["eis", "--p", "7", "--k", "6", "--qprec", "15"])
    assert a == b and a[0] == 0
    assert parse_qexp(a[1]) == eisenstein(6, PadicCtx(7, 10), 15)


def test_stabilize_writes_qexp(monkeypatch):
    D = delta(PadicCtx(11, 5), 60)
    code, out = call(["stabilize", "--root", "unit"], D.to_text(), monkeypatch)
    assert code == 0
    g = parse_qexp(out)
    assert g.coeffs[1] == 1


def test_up_matrix_lines():
    code, out = call(["up-matrix", "--p", "5", "--k", "12", "--dim", "4", "--qprec", "20", "--prec", "6"])
    assert code == 0
    char = [line for line in out.splitlines() if line.startswith("char")]
    assert char[0].startswith("char n=0 coeff=1")


def test_triple_value_anchor():
    code, out = call(["triple-value", "--p", "13", "--k", "24", "--l", "12", "--m", "12", "--prec", "4"])
    assert code == 0
    vals = kv(out)
    assert vals["t"] == "0" and vals["routes_agree"] == "True"
    assert int(vals["value"]) == 332737 % 13 ** int(vals["certified"])


def test_rankin_odd_weight():
    code, out = call(["rankin-value", "--p", "11", "--k1", "12", "--k2", "5", "--k3", "4", "--prec", "3"])
    assert code == 0 and kv(out)["zero_eisenstein"] == "True" and kv(out)["value"] == "0"


def test_nhoc_commands(monkeypatch):
    ctx = PadicCtx(7, 5)
    F = FilteredForm.embed(eisenstein(4, ctx, 12), 4)
    code, out = call(["nabla-vector"], F.to_text(), monkeypatch)
    assert code == 0
    G = parse_nhoc(out)
    assert G.r == 1 and G.k == 6
    code, out = call(["oc-project"], G.to_text(), monkeypatch)
    assert code == 0 and parse_qexp(out).valuation() >= 5


@pytest.mark.parametrize("argv,code", [
    (["nu-table", "--p", "4", "--n", "3"], 1),
    (["nu-table", "--p", "5", "--n", "0"], 1),
    (["nonsense"], 1),
    (["up-matrix", "--p", "5", "--k", "12", "--dim", "6", "--qprec", "20", "--prec", "6"], 2),
    (["triple-value", "--p", "13", "--k", "24", "--l", "12", "--m", "13"], 3),
    (["triple-value", "--p", "13", "--k", "20", "--l", "12", "--m", "12"], 3),
])
def test_exit_codes(argv, code):
    assert call(argv)[0] == code


def test_bad_qexp_input(monkeypatch):
    assert call(["theta"], "not a series", monkeypatch)[0] == 1


def test_selftest_fast():
    code, out = call(["selftest", "--fast"])
    assert code == 0
    assert out.splitlines()[-1] == "summary failures=0"
    assert call(["selftest", "--module", "bogus"])[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "padic_gm.cli", "nu-table", "--p", "3", "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "m=1 nu=3 rho_check=ok"
