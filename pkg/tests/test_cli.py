import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given

from conftest import e, polys
from freefock import cli
from freefock.freepoly import FreePoly


def call(argv, stdin_text=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin_text is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    code = cli.run(argv, stdout=out, stderr=err)
    data = json.loads(out.getvalue()) if code == 0 else None
    return code, data, err.getvalue()


def write(tmp_path, name, poly):
    path = tmp_path / name
    path.write_text(poly.to_json() if isinstance(poly, FreePoly) else json.dumps(poly))
    return str(path)


@given(polys(n=3, max_len=4, max_terms=6))
def test_json_round_trip(p):
    assert FreePoly.from_json(p.to_json()) == p


def test_norm_of_letter(tmp_path):
    code, data, _ = call(["norm", "-i", write(tmp_path, "p.json", e(2, (1,)))])
    assert code == 0
    assert data["value"] == pytest.approx(1.0, abs=1e-12)
    lo, hi = data["interval"]
    assert lo <= 1.0 + 1e-12 and hi >= 1.0 - 1e-12


def test_inner_check_example(tmp_path):
    p = FreePoly(2, {(): 1, (1,): 1}) / math.sqrt(2)
    code, data, _ = call(["inner-check", "-i", write(tmp_path, "p.json", p)])
    assert code == 0
    assert data["verdict"] is False
    assert data["defect"] == pytest.approx(0.5, abs=1e-12)


def test_zlambda_example():
    code, data, _ = call(["zlambda", "--lambda", "0.5,0", "--degree", "3"])
    assert code == 0
    got = FreePoly.from_json_obj(data)
    assert got == FreePoly(2, {(): 1, (1,): 0.5, (1, 1): 0.25, (1, 1, 1): 0.125})
    assert data["tail_bound"] == pytest.approx(math.sqrt(0.25 ** 4 / 0.75))


def test_stdin_input(monkeypatch):
    code, data, _ = call(["ideal-check"], e(2, (1, 2)).to_json(), monkeypatch)
    assert code == 0 and data["verdict"] is False and data["value"] == 1.0


def test_malformed_json_reports_position(monkeypatch):
    code, _, err = call(["norm"], '{"n": 2, "terms": [', monkeypatch)
    assert code == 2
    assert "line 1, column" in err


def test_precondition_exit_codes(tmp_path):
    bad = write(tmp_path, "bad.json", {"n": 2, "terms": [{"word": [3], "re": 1.0, "im": 0.0}]})
    assert call(["norm", "-i", bad])[0] == 2
    assert call(["zlambda", "--lambda", "0.8,0.7"])[0] == 2
    assert call(["norm", "--degree", "-1", "-i", write(tmp_path, "p.json", e(2))])[0] == 2
    assert call(["no-such-command"])[0] == 2


def test_resource_cap_exit_code(tmp_path):
    p = write(tmp_path, "p.json", FreePoly(2, {(): 1, (1,): 0.3, (2,): 0.2}))
    code, _, err = call(["outer-check", "-i", p, "--degree", "12", "--cap", "100"])
    assert code == 3 and "cap" in err
    # the norm estimate stops at the cap and reports the interval reached
    code, data, _ = call(["norm", "-i", p, "--degree", "12", "--cap", "100"])
    assert code == 0 and data["converged"] is False
    assert data["interval"][0] <= data["interval"][1]


def test_divide_and_not_divisible(tmp_path):
    a = FreePoly(2, {(1,): 1})
    b = FreePoly(2, {(2, 1): 1})
    code, data, _ = call(["divide", "-i", write(tmp_path, "num.json", b), "--divisor", write(tmp_path, "den.json", FreePoly(2, {(2,): 1}))])
    assert code == 0 and data["divisible"] and FreePoly.from_json_obj(data["quotient"]).distance(a) <= 1e-8
    code, data, _ = call(["divide", "-i", write(tmp_path, "n2.json", a), "--divisor", write(tmp_path, "d2.json", FreePoly(2, {(2,): 1}))])
    assert code == 0 and data["divisible"] is False


def test_factor_and_wandering(tmp_path):
    psi = FreePoly(2, {(1,): 1, (): 0.5})
    code, data, _ = call(["factor", "-i", write(tmp_path, "p.json", psi), "--degree", "6"])
    assert code == 0 and data["inner_defect"] < 0.05
    gens = {"generators": [FreePoly(2, {(1,): 1}).to_json_obj(), FreePoly(2, {(2, 2): 1}).to_json_obj()]}
    code, data, _ = call(["wandering", "-i", write(tmp_path, "g.json", gens), "--degree", "4"])
    assert code == 0 and data["dim"] == 2


def test_catalog_and_mobius():
    code, data, _ = call(["mobius", "--n", "2", "--word", "1,2", "--mu", "0.5", "--degree", "4"])
    assert code == 0
    assert FreePoly.from_json_obj(data).coeff(()) == -0.5
    code, data, _ = call(["catalog", "monomial", "--n", "3", "--word", "3,1"])
    assert code == 0 and FreePoly.from_json_obj(data) == e(3, (3, 1))


def test_codim1_commands(tmp_path):
    comm = FreePoly(2, {(1, 2): 1, (2, 1): -1})
    path = write(tmp_path, "c.json", comm)
    code, data, _ = call(["mlambda-contains", "-i", path, "--lambda", "0.3,0.2j"])
    assert code == 0 and data["verdict"] is True
    code, data, _ = call(["abelianize", "-i", path])
    assert code == 0 and data["terms"] == []
    code, data, _ = call(["wandering-lambda", "--lambda", "0.3,0.1", "--degree", "10"])
    assert code == 0 and len(data["functions"]) == 3
    code, data, _ = call(["project", "--which", "q", "--lambda", "0.3,0.1", "-i", write(tmp_path, "one.json", e(2))])
    assert code == 0 and data["tail_bound"] > 0


def test_vn_test_is_reproducible(tmp_path):
    path = write(tmp_path, "p.json", FreePoly(2, {(1, 2): 0.6, (2,): -0.5j, (): 0.2}))
    argv = ["vn-test", "-i", path, "--samples", "10", "--dims", "2,3", "--seed", "4", "--degree", "4"]
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        assert cli.run(argv, stdout=buf, stderr=io.StringIO()) == 0
        outs.append(buf.getvalue())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["violations"] == 0


def test_console_script(tmp_path):
    path = write(tmp_path, "p.json", e(2, (1,)))
    res = subprocess.run([sys.executable, "-m", "freefock.cli", "inner-check", "-i", path],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["verdict"] is True
