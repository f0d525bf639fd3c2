import json
import math
import subprocess
import sys

import pytest

from meroscope.cli import main


def spec(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def specs(tmp_path):
    return {
        # t + 1/(t - 0.3) = (t**2 - 0.3 t + 1)/(t - 0.3)
        "pole": spec(tmp_path, "pole.json", {"type": "rational", "num": [[1, 0], [-0.3, 0], [1, 0]], "den": [[-0.3, 0], [1, 0]]}),
        "cubic": spec(tmp_path, "cubic.json", {"type": "rational", "num": [[0, 0], [0, 0], [0, 0], [1, 0]], "den": [[1, 0]]}),
        # 0.5 + 1/(t - 0.3) winds -1: its zero -1.7 lies outside, the pole inside
        "shifted": spec(tmp_path, "shifted.json", {"type": "rational", "num": [[0.85, 0], [0.5, 0]], "den": [[-0.3, 0], [1, 0]]}),
        "bad": spec(tmp_path, "bad.json", {"type": "rational", "num": [[0, 0]], "den": "x"}),
        "exp": spec(tmp_path, "exp.json", {"type": "laurent", "neg": [[1 / math.factorial(k), 0] for k in range(1, 120)], "nonneg": []}),
        "quad": spec(tmp_path, "quad.json", {"type": "laurent", "neg": [], "nonneg": [[0, 0], [1, 0], [0.1, 0]]}),
        "bm": spec(tmp_path, "bm.json", {"type": "rational", "num": [[0, 0], [1, 0]], "den": [[1, 0], [-0.5, 0]]}),
    }


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_single_pole(capsys, specs):
    code, out, _ = run(capsys, "analyze", specs["pole"])
    doc = json.loads(out)
    assert code == 0
    assert doc["pole_report"]["m"] == 1
    (pole,) = doc["pole_report"]["poles"]
    assert pole[0] == pytest.approx(0.3, abs=1e-10)
    assert doc["witness_below"]["found"] and doc["witness_below"]["zero_count"] > doc["witness_below"]["bound"]
    assert doc["necessity"]["violations"] == 0


def test_analyze_polynomial(capsys, specs):
    code, out, _ = run(capsys, "analyze", specs["cubic"])
    assert code == 0 and json.loads(out)["pole_report"]["m"] == 0


def test_analyze_malformed_spec(capsys, specs):
    code, out, err = run(capsys, "analyze", specs["bad"])
    assert code == 1 and out == ""
    record = json.loads(err.strip().splitlines()[-1])
    assert record["field"] == "den"
    assert record["error"] == "SpecError"


def test_analyze_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", str(tmp_path / "nope.json"))
    assert code == 1 and "error" in json.loads(err.strip().splitlines()[-1])


def test_analyze_not_meromorphic(capsys, specs):
    code, out, _ = run(capsys, "--max-m", "6", "analyze", specs["exp"])
    assert code == 2
    assert json.loads(out)["pole_report"]["m"] == "not_meromorphic"


def test_winding_command(capsys, specs):
    code, out, _ = run(capsys, "winding", specs["shifted"])
    assert code == 0 and json.loads(out)["winding"] == -1


def test_zeros_command(capsys, specs):
    code, out, _ = run(capsys, "zeros", specs["pole"], "--rho", "0.5")
    assert code == 0
    code, out, _ = run(capsys, "zeros", specs["shifted"], "--q", "[[0.5, 0]]")
    doc = json.loads(out)
    assert code == 0 and doc["winding"] == doc["deg_q"] - doc["exterior_zeros"]


def test_rigidity_command(capsys, specs):
    code, out, _ = run(capsys, "--seed", "3", "rigidity", specs["pole"], "--m", "1", "--trials", "12")
    doc = json.loads(out)
    assert code == 0
    assert doc["equivalence"]["matches"] == 12 and doc["equivalence"]["bound_violations"] == 0
    assert len(doc["equivalence"]["records"]) == 12


def test_valence_command(capsys, specs):
    code, out, _ = run(capsys, "valence", specs["bm"])
    doc = json.loads(out)
    assert code == 0 and doc["is_Bm"] is True
    code, out, _ = run(capsys, "valence", specs["quad"])
    doc = json.loads(out)
    assert doc["is_Bm"] is False and doc["deviation"] == pytest.approx(0.01)


def test_ell_dump(capsys):
    code, out, _ = run(capsys, "valence", "--m", "2", "--dump-ell", "--k-max", "4")
    doc = json.loads(out)
    assert code == 0
    assert sorted(map(tuple, [(tuple(e), c) for e, c in doc["ell"]["3"]])) == [((1, 1), 2), ((3, 0), -1)]


def test_transform_json_lines(capsys, specs):
    code, out, _ = run(capsys, "transform", specs["quad"], "--a", "0.1", "--a", "0.05j")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 3
    recs = [json.loads(line) for line in lines]
    assert [r["step"] for r in recs] == [0, 1, 2]
    assert recs[0]["phi"][0] == pytest.approx(0.01)


def test_transform_random_steps_on_member(capsys, specs):
    code, out, _ = run(capsys, "--seed", "5", "transform", specs["bm"], "--random-steps", "3")
    recs = [json.loads(line) for line in out.strip().splitlines()]
    assert code == 0 and len(recs) == 4
    assert all(r["bm_deviation"] <= 1e-10 for r in recs)


def test_verify_rigidity_trial_records(capsys):
    code, out, _ = run(capsys, "verify", "rigidity", "--seed", "7", "--trials", "10")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert len(doc["suites"]["rigidity"]["records"]) == 10


def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify", "all", "--seed", "42")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert set(doc["suites"]) == {"rigidity", "necessity", "valence"}


def test_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "nope")
    assert code == 1 and json.loads(err.strip().splitlines()[-1])["error"] == "ConfigError"


@pytest.mark.parametrize(
    "argv, field",
    [
        (["--grid-size", "1000", "verify", "all"], "grid_size"),
        (["--gap-threshold", "0", "verify", "all"], "gap_threshold"),
        (["--residual-tol", "-1", "verify", "all"], "residual_tol"),
    ],
)
def test_config_errors(capsys, argv, field):
    code, _, err = run(capsys, *argv)
    assert code == 1 and json.loads(err.strip().splitlines()[-1])["field"] == field


def test_global_flags_after_subcommand(capsys, specs):
    a = run(capsys, "--seed", "9", "rigidity", specs["pole"], "--m", "1", "--trials", "5")
    b = run(capsys, "rigidity", specs["pole"], "--m", "1", "--trials", "5", "--seed", "9")
    assert a == b


def test_seed_from_environment(capsys, monkeypatch, specs):
    explicit = run(capsys, "--seed", "11", "verify", "necessity", "--trials", "5")
    monkeypatch.setenv("MEROSCOPE_SEED", "11")
    from_env = run(capsys, "verify", "necessity", "--trials", "5")
    assert explicit == from_env


def test_text_format(capsys, specs):
    code, out, _ = run(capsys, "--format", "text", "winding", specs["shifted"])
    assert code == 0
    assert "winding: -1" in out.splitlines()


def test_output_file(capsys, tmp_path, specs):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "--output", str(target), "winding", specs["shifted"])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["winding"] == -1


def test_console_entry_point(specs):
    proc = subprocess.run(
        [sys.executable, "-m", "meroscope.cli", "analyze", specs["bad"]],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    assert json.loads(proc.stderr.strip().splitlines()[-1])["field"] == "den"
