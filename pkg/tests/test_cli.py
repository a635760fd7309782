import json
import os
import subprocess
import sys

import numpy as np
import pytest

from bridgegh import cli
from bridgegh.limits import SubordinatorSample
from bridgegh.walks import DistanceMatrix, matrix_to_csv

THEOREM1 = {"study": "theorem1", "family": "gaussian-isotropic", "schedule": [[20, 20]],
            "m": 4, "trials": 3, "seed": 1}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def snapshot(root):
    return sorted(str(p.relative_to(root)) for p in root.rglob("*"))


def test_study_creates_outputs(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", THEOREM1)
    out = tmp_path / "r"
    assert cli.run(["study", "theorem1", "--config", cfg, "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["report.csv", "resolved_config.json", "summary.csv"]
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["epsilon_list"] == [0.1] and resolved["m"] == 4
    assert (out / "report.csv").read_text().startswith("study,family,alpha,d,n,m,trial,statistic,value\n")


def test_study_rerun_is_byte_identical(tmp_path):
    cfg = write_json(tmp_path / "c.json", {**THEOREM1, "schedule": [[20, 20], [30, 30]]})
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.run(["study", "theorem1", "--config", cfg, "--out", str(a)]) == 0
    assert cli.run(["study", "theorem1", "--config", cfg, "--out", str(b), "--workers", "2"]) == 0
    for name in ("report.csv", "summary.csv", "resolved_config.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_plot_is_deterministic(tmp_path):
    cfg = write_json(tmp_path / "c.json", {**THEOREM1, "schedule": [[20, 20], [40, 40]]})
    outs = []
    for name in ("p1", "p2"):
        assert cli.run(["study", "theorem1", "--config", cfg, "--out", str(tmp_path / name), "--plot"]) == 0
        outs.append((tmp_path / name / "medians.svg").read_bytes())
    assert outs[0] == outs[1] and outs[0].lstrip().startswith(b"<?xml")


def test_overwrite_requires_flag(tmp_path):
    cfg = write_json(tmp_path / "c.json", THEOREM1)
    out = str(tmp_path / "r")
    assert cli.run(["study", "theorem1", "--config", cfg, "--out", out]) == 0
    assert cli.run(["study", "theorem1", "--config", cfg, "--out", out]) == 2
    assert cli.run(["study", "theorem1", "--config", cfg, "--out", out, "--overwrite"]) == 0


def test_heavy_study_writes_notes(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"study": "angular", "family": "pareto-sphere", "alpha": 0.5,
                                           "schedule": [[10, 10]], "trials": 5})
    out = tmp_path / "r"
    assert cli.run(["study", "angular", "--config", cfg, "--out", str(out)]) == 0
    assert "conditioning" in (out / "notes.txt").read_text()


@pytest.mark.parametrize("patch", [
    {"alpha": 1.5, "family": "pareto-sphere", "study": "theorem2"},
    {"bogus": 3},
    {"m": 50},
    {"schedule": []},
    {"trials": 0},
])
def test_config_errors_exit_2(tmp_path, capsys, patch):
    cfg = write_json(tmp_path / "c.json", {**THEOREM1, **patch})
    kind = patch.get("study", "theorem1")
    assert cli.run(["study", kind, "--config", cfg, "--out", str(tmp_path / "r")]) == 2
    assert capsys.readouterr().err.startswith("error:")
    assert not (tmp_path / "r").exists()


def test_alpha_error_message(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"study": "theorem2", "family": "pareto-sphere", "alpha": 1.5,
                                           "schedule": [[10, 10]]})
    assert cli.run(["study", "theorem2", "--config", cfg]) == 2
    assert "alpha out of range" in capsys.readouterr().err


def test_missing_config_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert cli.run(["study", "theorem1", "--config", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_malformed_json_and_kind_mismatch(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.run(["study", "theorem1", "--config", str(bad)]) == 2
    (tmp_path / "list.json").write_text("[1, 2]")
    assert cli.run(["study", "theorem1", "--config", str(tmp_path / "list.json")]) == 2
    cfg = write_json(tmp_path / "c.json", THEOREM1)
    assert cli.run(["study", "lemma1", "--config", cfg]) == 2


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["study"], ["study", "theorem9", "--config", "x"],
    ["gh", "--a", "x.csv"], ["limit-sample", "--alpha", "half", "--out", "x"],
    ["study", "theorem1", "--config", "c.json", "--workers", "0"],
])
def test_usage_errors_exit_2(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write_json(tmp_path / "c.json", THEOREM1)
    assert cli.run(argv) == 2
    assert "error" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert cli.run(["--help"]) == 0
    assert "study" in capsys.readouterr().out


def _matrix_file(path, D):
    path.write_text(matrix_to_csv(np.asarray(D, dtype=float)))
    return str(path)


def test_gh_prints_json_line(tmp_path, capsys):
    a = _matrix_file(tmp_path / "a.csv", [[0, 1], [1, 0]])
    b = _matrix_file(tmp_path / "b.csv", [[0, 3], [3, 0]])
    assert cli.run(["gh", "--a", a, "--b", b, "--exact"]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") == 1
    report = json.loads(out)
    assert report["lower"] == 1.0 and report["upper"] == 1.0 and report["exact"] == 1.0


def test_gh_exact_size_cap_exits_1(tmp_path, capsys):
    D = np.abs(np.subtract.outer(np.arange(6.0), np.arange(6.0)))
    a = _matrix_file(tmp_path / "a.csv", D)
    assert cli.run(["gh", "--a", a, "--b", a]) == 0
    capsys.readouterr()
    assert cli.run(["gh", "--a", a, "--b", a, "--exact"]) == 1
    assert "exact oracle capped at 5 points" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["0,1\n2,0\n", "0,1\nx,0\n", "0,1,2\n1,0,1\n", ""])
def test_gh_bad_matrix_exits_1(tmp_path, text):
    bad = tmp_path / "bad.csv"
    bad.write_text(text)
    good = _matrix_file(tmp_path / "g.csv", [[0, 1], [1, 0]])
    assert cli.run(["gh", "--a", str(bad), "--b", good]) == 1


def test_gh_missing_file_exits_1(tmp_path):
    good = _matrix_file(tmp_path / "g.csv", [[0, 1], [1, 0]])
    assert cli.run(["gh", "--a", str(tmp_path / "missing.csv"), "--b", good]) == 1


def test_limit_sample(tmp_path):
    out = tmp_path / "atoms.csv"
    argv = ["limit-sample", "--alpha", "0.5", "--eps", "1e-3", "--seed", "4", "--out", str(out)]
    assert cli.run(argv) == 0
    first = out.read_bytes()
    sample = SubordinatorSample.from_csv(out, 0.5, 1e-3)
    assert np.all(sample.y > 1e-3)
    assert cli.run(argv) == 2
    assert cli.run(argv + ["--overwrite"]) == 0
    assert out.read_bytes() == first
    assert cli.run(["limit-sample", "--alpha", "1.5", "--out", str(tmp_path / "x.csv")]) == 2


def test_matrix(tmp_path):
    cfg = write_json(tmp_path / "c.json", THEOREM1)
    out = tmp_path / "m.csv"
    assert cli.run(["matrix", "--config", cfg, "--out", str(out)]) == 0
    D = DistanceMatrix.from_csv(out)
    assert D.m == 5 and D.entries[0, 4] == 0.0
    assert cli.run(["matrix", "--config", cfg, "--out", str(out)]) == 2
    cfg2 = write_json(tmp_path / "c2.json", {**THEOREM1, "m": 25})
    assert cli.run(["matrix", "--config", cfg2, "--out", str(tmp_path / "m2.csv")]) == 2


def test_unwritable_output_exits_1(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_json(tmp_path / "c.json", THEOREM1)
    assert cli.run(["matrix", "--config", cfg, "--out", str(blocker / "m.csv")]) == 1


def test_no_writes_outside_out(tmp_path, monkeypatch):
    work = tmp_path / "work"
    work.mkdir()
    monkeypatch.chdir(work)
    cfg = write_json(tmp_path / "c.json", THEOREM1)
    mat = _matrix_file(tmp_path / "a.csv", [[0, 1], [1, 0]])
    before = snapshot(tmp_path)
    assert cli.run(["study", "theorem1", "--config", cfg, "--out", str(tmp_path / "o"), "--plot"]) == 0
    assert cli.run(["gh", "--a", mat, "--b", mat, "--exact"]) == 0
    assert cli.run(["limit-sample", "--alpha", "0.5", "--eps", "0.01", "--out", str(tmp_path / "o2" / "s.csv")]) == 1
    assert cli.run(["limit-sample", "--alpha", "0.5", "--eps", "0.01", "--out", str(tmp_path / "s.csv")]) == 0
    assert cli.run(["matrix", "--config", cfg, "--out", str(tmp_path / "m.csv")]) == 0
    after = set(snapshot(tmp_path)) - set(before)
    assert after == {"o", "o/report.csv", "o/summary.csv", "o/resolved_config.json", "o/medians.svg",
                     "s.csv", "m.csv"}
    assert os.listdir(work) == []


def test_module_entry_point(tmp_path):
    a = _matrix_file(tmp_path / "a.csv", [[0, 2], [2, 0]])
    proc = subprocess.run([sys.executable, "-m", "bridgegh", "gh", "--a", a, "--b", a],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["upper"] == 0.0
