import io
import json
import subprocess
import sys

import pytest

from nidwca.cli import run_command
from nidwca.dataset import Mode
from nidwca.engine import BasinId
from nidwca.model_io import ModelFile, save_model
from nidwca.rules import RuleVector
from nidwca.tree import BasinStats, TreeNode

FAST = {"ga": {"population_size": 8, "generations": 2}, "tree": {"max_depth": 1}}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "cfg.json").write_text(json.dumps(FAST))
    assert run_command(["gen-synthetic", "--out", str(d / "train.kdd"), "--n-normal", "60",
                        "--n-attack", "60", "--seed", "2"]) == 0
    assert run_command(["gen-synthetic", "--out", str(d / "test.kdd"), "--n-normal", "20",
                        "--n-attack", "20", "--seed", "2"]) == 0
    assert run_command(["train", "--data", str(d / "train.kdd"), "--config", str(d / "cfg.json"),
                        "--seed", "7", "--out", str(d / "m.model")]) == 0
    return d


def test_train_is_byte_identical(workdir):
    assert run_command(["train", "--data", str(workdir / "train.kdd"), "--config",
                        str(workdir / "cfg.json"), "--seed", "7",
                        "--out", str(workdir / "again.model")]) == 0
    assert (workdir / "again.model").read_bytes() == (workdir / "m.model").read_bytes()


def test_classify_file_and_stdin(workdir, capsys, monkeypatch):
    capsys.readouterr()
    assert run_command(["classify", "--model", str(workdir / "m.model"),
                        "--data", str(workdir / "test.kdd")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 40
    for line in lines:
        label, score, path = line.split(",")
        assert label in ("attack", "normal") and 0 <= float(score) <= 1 and path
    monkeypatch.setattr(sys, "stdin", io.StringIO((workdir / "test.kdd").read_text()))
    assert run_command(["classify", "--model", str(workdir / "m.model")]) == 0
    assert capsys.readouterr().out.splitlines() == lines


def test_classify_missing_model(capsys):
    assert run_command(["classify", "--model", "missing.model"]) == 1
    err = capsys.readouterr().err
    assert err.startswith("nidwca-error: ") and "missing.model" in err
    assert err.count("\n") == 1


def test_usage_errors(capsys):
    assert run_command(["bogus"]) == 2
    assert "usage" in capsys.readouterr().err
    assert run_command(["train", "--nope"]) == 2


def test_bad_data_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.kdd"
    bad.write_text("1,2,3\n")
    assert run_command(["train", "--data", str(bad), "--out", str(tmp_path / "m")]) == 1
    assert "line 1" in capsys.readouterr().err


def test_bad_config_exit_1(workdir, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ga": {"population_size": "many"}}))
    assert run_command(["train", "--data", str(workdir / "train.kdd"), "--config", str(cfg),
                        "--out", str(tmp_path / "m")]) == 1
    assert "ConfigError" in capsys.readouterr().err


def test_inspect_figure1(tmp_path, capsys):
    rules = RuleVector.from_numbers([238, 254, 238, 252])
    b = BasinId((0, 0, 0, 0), 1)
    tree = TreeNode(rules, (0, 1, 2, 3), {b: BasinStats.labeled(b, 10, 8)})
    save_model(ModelFile(tree, None, "x", Mode.LABELED, {}, 0), tmp_path / "f.model")
    assert run_command(["inspect", "--model", str(tmp_path / "f.model")]) == 0
    out = capsys.readouterr().out
    assert "1 1 0 0\n1 1 1 0\n0 0 1 1\n0 0 1 1" in out
    assert "<238, 254, 238, 252>" in out
    assert "0.8000" in out


def test_evaluate_model_and_experiment(workdir, tmp_path, capsys):
    out = tmp_path / "eval"
    assert run_command(["evaluate", "--model", str(workdir / "m.model"),
                        "--test", str(workdir / "test.kdd"), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["model.csv", "summary.json"]
    cfg = tmp_path / "plan.json"
    cfg.write_text(json.dumps(dict(FAST, plan={"targets": [["dos", ["dos"]]]})))
    out2 = tmp_path / "exp"
    assert run_command(["evaluate", "--data", str(workdir / "train.kdd"), "--test",
                        str(workdir / "test.kdd"), "--config", str(cfg), "--out", str(out2)]) == 0
    summary = json.loads((out2 / "summary.json").read_text())
    assert summary["classifiers"][0]["best"]["detection_rate"] >= 0.9


def test_unlabeled_train(workdir, tmp_path):
    assert run_command(["train", "--data", str(workdir / "train.kdd"), "--config",
                        str(workdir / "cfg.json"), "--mode", "unlabeled",
                        "--out", str(tmp_path / "u.model")]) == 0
    assert json.loads((tmp_path / "u.model").read_text())["mode"] == "unlabeled"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nidwca", "--version"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and "nidwca" in r.stdout
