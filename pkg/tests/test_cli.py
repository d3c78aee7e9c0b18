import csv
import io
import json

import pytest

from pwlopt.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_approx_sqrt_plain(capsys):
    code, out, _ = run(capsys, "approx", "sqrt", "--epsilon", "0.25", "--grid", "plain")
    data = json.loads(out)
    assert code == 0 and data["measured_max_ratio"] <= 1.0590170


def test_approx_piece_count(capsys):
    code, out, _ = run(capsys, "approx", "sqrt", "--upper", "90", "--epsilon", "0.01")
    assert json.loads(out)["n_pieces"] == 115


def test_approx_linear_exact(capsys):
    code, out, _ = run(capsys, "approx", '{"kind": "linear", "slope": 2}')
    assert code == 0 and json.loads(out)["measured_max_ratio"] == pytest.approx(1.0)


def test_approx_csv_and_output_file(capsys, tmp_path):
    target = tmp_path / "psi.csv"
    code, _, _ = run(capsys, "approx", "log1p", "--format", "csv", "-o", str(target))
    rows = list(csv.DictReader(target.open()))
    assert code == 0 and rows and set(rows[0]) == {"knot", "slope", "intercept"}


def test_bad_spec_exit_code(capsys):
    code, _, err = run(capsys, "approx", '{"kind": "bogus"}')
    assert code == 2 and "bogus" in err
    code, _, _ = run(capsys, "approx", "{not json")
    assert code == 2


def test_bounds(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"A": [[1]], "b": [1]}))
    code, out, _ = run(capsys, "bounds", str(path))
    data = json.loads(out)
    assert code == 0 and data["U"] == 44 and data["V_le_U"]


def test_bounds_zero_matrix(capsys):
    code, out, _ = run(capsys, "bounds", '{"A": [[0, 0]], "b": [0]}')
    data = json.loads(out)
    assert data["size_A"] == 2 + 2 and data["size_b"] == 1 + 1


def test_formulate_lp_and_json(capsys, tmp_path):
    prob = {"polyhedron": {"A": [[-1], [1]], "b": [-1, 2]},
            "costs": [{"kind": "power", "a": 1, "b": 1, "c": 0.5}], "interval": [1, 2]}
    path = tmp_path / "prob.json"
    path.write_text(json.dumps(prob))
    code, lp1, _ = run(capsys, "formulate", str(path), "--epsilon", "0.5")
    _, lp2, _ = run(capsys, "formulate", str(path), "--epsilon", "0.5")
    assert code == 0 and lp1 == lp2 and lp1.startswith("\\ fixed-charge model")
    _, js, _ = run(capsys, "formulate", str(path), "--epsilon", "0.5", "--format", "json")
    data = json.loads(js)
    assert data["binaries"] == len(data["model"]["pieces"][0])


def test_mcf_csv(capsys):
    code, out, _ = run(capsys, "mcf", "--n", "8", "--epsilon", "0.1", "--count", "2", "--jobs", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2 and rows[0]["m"] == "24"
    assert float(rows[0]["eps_all_pct"]) >= float(rows[0]["eps_da_pct"])


def test_mcf_bad_size(capsys):
    code, _, _ = run(capsys, "mcf", "--n", "6")
    assert code == 2


def test_flp(capsys):
    code, out, _ = run(capsys, "flp", "--customers", "4", "--facilities", "2", "--epsilon", "0.1")
    data = json.loads(out)
    assert code == 0 and data["certified"] and data["composed_factor"] >= 1.1


def test_flp_single_facility(capsys):
    inst = {"d": [1, 2], "c": [[1], [2]],
            "facilities": [{"kind": "power", "a": 1, "b": 1, "c": 0.5, "zero_at_origin": True}]}
    code, out, _ = run(capsys, "flp", "--instance", json.dumps(inst))
    data = json.loads(out)
    assert code == 0 and data["assignment"] == [0, 0] and data["ratio"] == pytest.approx(1.0)


@pytest.mark.parametrize("suite", ["tightness", "gamma-bounds", "vertex-size"])
def test_verify(capsys, suite):
    code, out, err = run(capsys, "verify", suite)
    assert code == 0 and json.loads(out)[suite]["passed"] and "PASS" in err


def test_log_env(capsys, monkeypatch):
    monkeypatch.setenv("PWLOPT_LOG", "debug")
    code, _, _ = run(capsys, "approx", "sqrt", "--upper", "10")
    assert code == 0
