import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from extremal_lab import cli
from extremal_lab import io as eio
from extremal_lab.solve import Branch, BranchRecord


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def branch_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("branch")
    path = d / "branch.json"
    csv_path = d / "branch.csv"
    code = cli.main(["continue", "--N", "60", "--s", "0.5", "--seed", "17", "--out", str(path),
                     "--csv", str(csv_path)])
    assert code == 0
    return path, csv_path


def test_continue_writes_valid_branch(branch_file):
    path, csv_path = branch_file
    doc = json.loads(path.read_text())
    eio.validate(doc, eio.BRANCH_SCHEMA)
    assert doc["status"] == "FoldFound" and doc["seed"] == 17
    assert doc["config"]["N"] == 60 and len(doc["records"][0]["u"]) == 60
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert tuple(rows[0]) == eio.BRANCH_CSV_COLUMNS
    assert len(rows) == len(doc["records"])


def test_branch_round_trip_is_byte_identical(branch_file):
    text = branch_file[0].read_text()
    assert eio.dumps(eio.loads(text)) + "\n" == text


def test_continue_is_deterministic(branch_file, tmp_path):
    other = tmp_path / "again.json"
    assert cli.main(["continue", "--N", "60", "--s", "0.5", "--seed", "17", "--out", str(other)]) == 0
    assert other.read_bytes() == branch_file[0].read_bytes()


def test_verify_passes_on_computed_branch(branch_file, tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(["verify", str(branch_file[0]), "--t", "1.0", "--out", str(out)], capsys)
    doc = json.loads(out.read_text())
    assert code == 0 and doc["passed"] and doc["seed"] == 17
    assert {r["check"] for r in doc["results"]} == set(cli.CHECKS)


def test_verify_detects_tampering(branch_file, tmp_path, capsys):
    doc = json.loads(branch_file[0].read_text())
    doc["records"][3]["u"][30] *= 1.5
    bad = tmp_path / "tampered.json"
    bad.write_text(eio.dumps(doc))
    code, out, _ = run(["verify", str(bad), "--checks", "residual,monotone"], capsys)
    assert code == 1 and not json.loads(out)["passed"]


def test_verify_empty_check_list(branch_file, capsys):
    code, out, _ = run(["verify", str(branch_file[0]), "--checks", ""], capsys)
    assert code == 0 and json.loads(out)["results"] == []


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(schema_version=2),
    lambda d: d["config"].update(N=0),
    lambda d: d["records"][0].pop("u"),
    lambda d: d["records"][0].update(u=[0.0] * 5),
])
def test_verify_rejects_bad_branch_files(branch_file, tmp_path, capsys, mutate):
    doc = json.loads(branch_file[0].read_text())
    mutate(doc)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(["verify", str(bad)], capsys)
    assert code == 2 and "error" in err


def test_verify_missing_file_and_unknown_check(branch_file, tmp_path, capsys):
    assert run(["verify", str(tmp_path / "nope.json")], capsys)[0] == 2
    assert run(["verify", str(branch_file[0]), "--checks", "bogus"], capsys)[0] == 2


@pytest.mark.parametrize("argv", [
    ["continue", "--N", "0"],
    ["continue", "--s", "1.5"],
    ["continue", "--family", "lane_emden"],
    ["continue", "--family", "bratu"],
    ["continue", "--sigma", "-1"],
    ["continue", "--N", "ten"],
    ["continue", "--singular-rule", "midpoint"],
    ["frobnicate"],
])
def test_configuration_errors(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_step_limit_exit_code(capsys, tmp_path):
    code, _, err = run(["continue", "--N", "40", "--max-steps", "2", "--out", str(tmp_path / "b.json")],
                       capsys)
    assert code == 4 and "StepLimit" in err


def test_constraint_hit_exit_code(monkeypatch, capsys, tmp_path):
    import extremal_lab.solve as solve

    def fake(opr, system, sigma, policy, compute_stability=True):
        recs = [BranchRecord(l, l, np.full(opr.N, l), np.full(opr.N, l), 1, 0.0) for l in (0.1, 0.2)]
        return Branch(recs, sigma, "ConstraintHit", 0.2, 0.25, system, False)

    monkeypatch.setattr(solve, "continue_branch", fake)
    code, _, err = run(["continue", "--family", "mems", "--p", "2", "--N", "10",
                        "--out", str(tmp_path / "b.json")], capsys)
    assert code == 3 and "ConstraintHit" in err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nfamily = lane_emden\np = 2\ns = 0.4\nN = 30\nseed = 5\n")
    out = tmp_path / "b.json"
    assert run(["continue", "--config", str(cfg), "--N", "24", "--out", str(out)], capsys)[0] == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["family"] == "lane_emden" and doc["config"]["s"] == 0.4
    assert doc["config"]["N"] == 24 and doc["seed"] == 5
    bad = tmp_path / "bad.ini"
    bad.write_text("[other]\nN = 3\n")
    assert run(["continue", "--config", str(bad)], capsys)[0] == 2


def test_thread_variable(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv(cli.THREADS_ENV, "1")
    assert run(["continue", "--N", "20", "--out", str(tmp_path / "b.json")], capsys)[0] == 0
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    assert run(["continue", "--N", "20"], capsys)[0] == 2


def test_thresholds_table(tmp_path, capsys):
    csv_path = tmp_path / "t.csv"
    code, out, _ = run(["thresholds", "--n", "1 2", "--s", "0.5", "--p", "2 3", "--csv", str(csv_path)],
                       capsys)
    doc = json.loads(out)
    eio.validate(doc, eio.REPORT_SCHEMA)
    assert code == 0 and len(doc["results"]) == 4
    assert doc["results"][0]["classical_gelfand"] == 10.0
    assert len(csv_path.read_text().splitlines()) == 5


def test_thresholds_empty_range(capsys):
    code, out, _ = run(["thresholds", "--n", "5:1:1"], capsys)
    assert code == 0 and json.loads(out)["results"] == []


def test_thresholds_bad_range(capsys):
    assert run(["thresholds", "--n", "1:5:0"], capsys)[0] == 2


def test_criterion_and_crossover(capsys):
    code, out, _ = run(["criterion", "--n", "7", "--s", "0.5"], capsys)
    assert code == 0 and json.loads(out)["results"][0]["verdict"] == "holds"
    code, out, _ = run(["criterion", "--family", "lane_emden", "--n", "3", "--s", "0.5", "--p", "2",
                        "--crossover"], capsys)
    res = json.loads(out)["results"][0]
    assert code == 0 and res["verdict"] == "holds" and res["crossover_n"] > 3
    assert run(["criterion", "--family", "lane_emden", "--n", "3", "--s", "0.5"], capsys)[0] == 2


def test_singular_check(capsys):
    code, out, _ = run(["singular-check", "--s", "0.3"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["results"]) == 3
    assert all(r["rel_error"] <= 1e-4 for r in doc["results"])
    assert run(["singular-check", "--n", "2"], capsys)[0] == 2
    assert run(["singular-check", "--points", "0 0.5"], capsys)[0] == 2
    code, _, _ = run(["singular-check", "--s", "0.3", "--tol", "1e-30"], capsys)
    assert code == 1


def test_bootstrap(capsys):
    code, out, _ = run(["bootstrap", "--n", "1", "--s", "0.5"], capsys)
    assert code == 0 and json.loads(out)["results"][0]["verdict"] == "Bounded"


def test_inequalities(capsys):
    code, out, _ = run(["inequalities", "--samples", "2000", "--seed", "3"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["seed"] == 3 and len(doc["results"]) == 5


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "extremal_lab", "criterion", "--n", "2", "--s", "0.3"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "criterion"
