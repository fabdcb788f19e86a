import json
import subprocess
import sys

import pytest

from metlogic import __version__
from metlogic.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert err == "", err
    return code, json.loads(out)


def test_mu_example(capsys, data_dir):
    code, rep = report(capsys, "mu", "--group", data_dir / "z4.json", "--F1", "0,1", "--F2", "1,2",
                       "--q", "1/2", "--closed", "--method", "both")
    assert code == 0
    assert rep["result"]["mu"] == 1 and rep["result"]["matching"] == [["1", "1"]]
    assert rep["version"] == __version__ and rep["seed"] == 0
    assert rep["config"]["q"] == "1/2" and rep["config"]["closure"] == "closed"


def test_malformed_group_file_exits_2(capsys, data_dir, tmp_path):
    code, out, err = run(capsys, "mu", "--group", data_dir / "broken.json", "--F1", "0", "--F2", "0", "--q", "1")
    assert code == 2 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "GroupAxiomError" and "witness" in payload["detail"]
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "group", "validate", bad)
    assert code == 2 and json.loads(err)["detail"]["line"] == 1


def test_bad_flags_exit_2_with_json(capsys):
    code, _, err = run(capsys, "mu", "--q", "x")
    assert code == 2 and json.loads(err)["error"] == "CLIError"


def test_group_validate_verdicts(capsys, data_dir):
    code, rep = report(capsys, "group", "validate", data_dir / "z6_metric.json")
    assert code == 0 and rep["result"]["bi_invariant"]
    code, rep = report(capsys, "group", "validate", data_dir / "broken.json")
    assert code == 1 and not rep["result"]["valid"]


def test_group_ball_and_dstar(capsys, data_dir):
    code, rep = report(capsys, "group", "ball", data_dir / "z6_metric.json", "--q", "5/9")
    assert rep["result"]["elements"] == ["0", "1", "5"]
    code, rep = report(capsys, "group", "dstar", data_dir / "s3.json")
    assert code == 0 and rep["result"]["bi_invariant"]


def test_folner_search_free_group_not_found(capsys, data_dir):
    code, rep = report(capsys, "folner-search", "--group", data_dir / "free2_r2.json", "--E", "a,A,b,B",
                       "--theta", "9/10", "--q", "1/2", "--closed", "--strategy", "exhaustive", "--workers", "2")
    assert code == 1
    nf = rep["result"]["not_found"]
    assert nf["exhaustive"] and nf["searched"] == 131071 and len(nf["worst"]) == 10


def test_folner_search_found(capsys, data_dir):
    code, rep = report(capsys, "folner-search", "--group", data_dir / "z_r12.json", "--E=1,-1", "--theta", "4/5",
                       "--q", "1/2", "--strategy", "ball-growing")
    assert code == 0 and rep["result"]["verification"] == "valid"
    assert len(rep["result"]["certificate"]["F"]) == 5


def test_budget_exhaustion_exits_2(capsys, data_dir):
    code, _, err = run(capsys, "folner-search", "--group", data_dir / "free2_r2.json", "--E", "a",
                       "--theta", "1/2", "--q", "1/2", "--budget", "100")
    assert code == 2 and json.loads(err)["error"] == "BudgetExhaustedError"


def test_phi(capsys, data_dir):
    code, out, _ = run(capsys, "phi", "--k", "1", "--q", "1/2", "--theta", "1/2", "--emit-dsl")
    assert code == 0 and out.startswith("max(") and out.rstrip().endswith("-. 1/2")
    code, rep = report(capsys, "phi", "--k", "2", "--q", "1/2", "--theta", "3/4", "--group", data_dir / "z4.json",
                       "--F", "0,1", "--y", "1")
    assert code == 1 and rep["result"]["agree"] and not rep["result"]["holds"]
    code, rep = report(capsys, "phi", "--variant", "neg", "--k", "2", "--q", "1/2", "--theta", "3/4",
                       "--group", data_dir / "z4.json", "--F", "0,1", "--y", "1")
    assert code == 0 and rep["result"]["holds"]
    code, _, err = run(capsys, "phi", "--k", "2", "--q", "1/2", "--theta", "1/2", "--group", data_dir / "z4.json",
                       "--F", "0,0", "--y", "1")
    assert code == 2 and "--multiset" in err


def test_schema(capsys, data_dir):
    code, rep = report(capsys, "schema", "--group", data_dir / "z6_metric.json", "--theta", "1/2", "--q", "1/3",
                       "--l", "1", "--k-max", "3")
    assert code == 0 and rep["result"]["results"][0]["verdict"] == "certified-for-samples"
    code, rep = report(capsys, "schema", "--group", data_dir / "free2_r2.json", "--theta", "9/10", "--q", "1/2",
                       "--l", "2", "--k-max", "3", "--y", "a,b")
    assert code == 1 and rep["result"]["results"][0]["verdict"] == "refuted-for-sample"
    code, rep = report(capsys, "schema", "--variant", "nonamen", "--group", data_dir / "z4.json", "--theta", "1/2",
                       "--q", "1/2,1", "--l", "1", "--k-max", "2")
    assert [r["q"] for r in rep["result"]["results"]] == ["1/2", "1"]


def test_parse_fmt_eval(capsys, data_dir):
    code, rep = report(capsys, "parse", data_dir / "phi_pos_k2.cl")
    assert code == 0 and [i["name"] for i in rep["result"]["items"]] == ["phi2", "sym"]
    code, out, _ = run(capsys, "fmt", data_dir / "phi_pos_k2.cl")
    assert out.splitlines()[0].startswith("phi2 := sup y:G .")
    code, rep = report(capsys, "eval", "--structure", data_dir / "z4_structure.json", data_dir / "phi_pos_k2.cl",
                       "--assign", "x1=0", "--assign", "x2=1")
    assert code == 0
    assert [i["value"] for i in rep["result"]["items"]] == ["1/2", "0"]
    code, _, err = run(capsys, "eval", "--structure", data_dir / "z4_structure.json", "--formula", "d(x, y)")
    assert code == 2 and json.loads(err)["error"] == "UnboundVariableError"
    code, _, err = run(capsys, "parse", "--seed", "1", data_dir / "missing.cl")
    assert code == 2


def test_rep_commands(capsys, data_dir):
    reps = data_dir / "reps"
    code, rep = report(capsys, "rep", "check", reps / "z12_complement.json", "--samples", "50")
    assert code == 0 and rep["result"]["kazhdan_pair"]["passed"]
    code, rep = report(capsys, "rep", "radius", reps / "z12_complement.json", "--Q", "1")
    lo, hi = rep["result"]["radius_interval"]
    assert lo == hi
    code, rep = report(capsys, "rep", "niv", reps / "z12_trivial.json")
    assert rep["result"]["value"] == 1
    code, rep = report(capsys, "rep", "kdelta", reps / "z_characters.json", "--delta", "1/2", "--k", "2",
                       "--m", "8", "--n", "4", "--pool=-8,-3,0,5,8")
    assert code == 0 and rep["result"]["residual"] == 0.0
    code, rep = report(capsys, "rep", "kdelta", reps / "z12_complement.json", "--delta", "1/2", "--k", "1",
                       "--m", "1", "--n", "1000")
    assert code == 1
    code, rep = report(capsys, "rep", "refute", "--Q", "1", "--eps", "1/10", "--family", data_dir / "z12_family")
    assert code == 0 and rep["result"]["witness_rep"] == "z_char_0.05.json"
    code, rep = report(capsys, "rep", "refute", "--Q", "1", "--eps", "1/1000", "--family", data_dir / "z12_family")
    assert code == 1 and not rep["result"]["refuted"]


def test_output_file(capsys, data_dir, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "group", "ball", data_dir / "z4.json", "--q", "1", "-o", out)
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["result"]["elements"] == ["0", "1", "2", "3"]


def test_console_entry_point(data_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "metlogic.cli", "group", "ball", str(data_dir / "z4.json"), "--q", "1/2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["elements"] == ["0"]


@pytest.mark.parametrize(
    "argv",
    [
        ["folner-search", "--group", "free2_r2.json", "--E", "a,b", "--theta", "3/4", "--q", "1/2",
         "--ground", "e,a,A,b,B,aa,ab,aB,AA,Ab,AB,ba"],
        ["schema", "--group", "free2_r2.json", "--theta", "9/10", "--q", "1/2", "--l", "1", "--k-max", "4",
         "--samples", "3"],
        ["rep", "check", "reps/z4_rotation.json", "--samples", "20", "--seed", "5"],
    ],
)
def test_reports_identical_across_workers(capsys, data_dir, argv, monkeypatch):
    monkeypatch.chdir(data_dir)
    outs = []
    for w in ("1", "3"):
        code, out, _ = run(capsys, *argv, "--workers", w)
        outs.append(out)
    assert outs[0] == outs[1]
