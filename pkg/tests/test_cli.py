import json

import numpy as np
import pytest

from ccguide import checkpoint
from ccguide.cli import main
from ccguide.model import build_ccdnn


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CCGUIDE_SEED", raising=False)
    return tmp_path


def read(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def test_gen_is_deterministic(tmp_path):
    args = ["gen", "--kind", "correlated-gaussian", "--n", "1000", "--rho", "0.9,0.5", "--seed", "7"]
    assert main(args + ["--out", "a"]) == 0
    assert main(args + ["--out", "b"]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["dataset.json", "view1.csv", "view2.csv"]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    side = read("a/dataset.json")
    assert side["seed"] == 7 and side["generator"] == "correlated-gaussian"
    assert side["params"]["rho"] == [0.9, 0.5]


def test_gen_invalid_rho(capsys):
    assert main(["gen", "--kind", "correlated-gaussian", "--rho", "1.5", "--out", "x"]) == 2
    assert "rho" in capsys.readouterr().err


def test_gen_noisy_patterns_shape(tmp_path):
    assert main(["gen", "--kind", "noisy-patterns", "--n", "200", "--side", "8", "--out", "p"]) == 0
    lines = (tmp_path / "p" / "view1.csv").read_text().splitlines()
    assert len(lines) == 201 and len(lines[0].split(",")) == 64
    assert len((tmp_path / "p" / "view2.csv").read_text().splitlines()[1].split(",")) == 64


def test_gen_unwritable_path(tmp_path, capsys):
    (tmp_path / "file").write_text("")
    assert main(["gen", "--kind", "noisy-patterns", "--n", "20", "--out", "file/sub"]) == 2
    assert "file/sub" in capsys.readouterr().err


def test_gen_requires_kind_and_out():
    assert main(["gen", "--out", "x"]) == 2
    assert main(["gen", "--kind", "classification"]) == 2


def test_cca_fit_known_answer(capsys):
    assert main(["cca-fit", "--kind", "correlated-gaussian", "--n", "20000", "--rho", "0.9,0.5",
                 "--out", "cca.json"]) == 0
    printed = json.loads(capsys.readouterr().out)
    doc = read("cca.json")
    assert printed == doc
    np.testing.assert_allclose(doc["rho"], [0.9, 0.5], atol=0.02)
    assert doc["kappa"] == 2 and doc["n"] == 20000
    assert max(doc["identity_residuals"].values()) <= 1e-6


def test_cca_fit_identical_views(tmp_path, capsys):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(300, 2)).tolist()
    rows = "\n".join(f"{a!r},{b!r},{a!r},{b!r}" for a, b in x)
    (tmp_path / "same.csv").write_text("a,b,c,d\n" + rows + "\n")
    assert main(["cca-fit", "--csv", "same.csv", "--view1-cols", "a,b", "--view2-cols", "c,d"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert min(doc["rho"]) >= 1 - 1e-6


def test_cca_fit_from_gen_directory(capsys):
    assert main(["gen", "--kind", "correlated-gaussian", "--n", "500", "--out", "d"]) == 0
    capsys.readouterr()
    assert main(["cca-fit", "--data", "d", "--split", "train"]) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 400


def test_pinned_classify_report():
    assert main(["train", "--task", "classify", "--n", "600", "--epochs", "20", "--seed", "3",
                 "--out", "run"]) == 0
    rep = read("run/report.json")
    assert rep["schema"] == "ccguide-report" and rep["version"] == 1
    assert rep["label"] == "CCDNN" and len(rep["epochs"]) == 20
    assert rep["final"]["test"]["accuracy"] == 0.8722222222222222
    assert rep["config"]["dataset"]["kind"] == "classification"
    assert rep["config"]["lr"] == 1e-2 and rep["config"]["seed"] == 3
    for e in rep["epochs"]:
        assert {"loss", "total_correlation", "metrics", "seconds"} <= set(e)


def test_eval_matches_report_finals(capsys):
    assert main(["train", "--task", "classify", "--n", "300", "--epochs", "3", "--without-filter",
                 "--out", "run"]) == 0
    rep = read("run/report.json")
    assert rep["label"] == "CCDNN_wRF"
    model, _ = checkpoint.load("run/checkpoint.json")
    assert not model.use_filter
    capsys.readouterr()
    assert main(["eval", "--checkpoint", "run/checkpoint.json", "--out", "m.json"]) == 0
    assert json.loads(capsys.readouterr().out) == rep["final"]["test"]
    doc = read("m.json")
    assert doc["label"] == "CCDNN_wRF" and doc["metrics"] == rep["final"]["test"]


def test_reconstruct_eval_with_explicit_data(capsys):
    assert main(["gen", "--kind", "noisy-patterns", "--n", "200", "--seed", "2", "--out", "d"]) == 0
    assert main(["train", "--task", "reconstruct", "--data", "d", "--epochs", "2", "--out", "run"]) == 0
    rep = read("run/report.json")
    capsys.readouterr()
    assert main(["eval", "--checkpoint", "run/checkpoint.json", "--data", "d"]) == 0
    assert json.loads(capsys.readouterr().out) == rep["final"]["test"]
    assert {"mse", "mae"} <= set(rep["final"]["test"])


def test_eval_mismatched_dims(capsys):
    assert main(["train", "--task", "reconstruct", "--n", "100", "--epochs", "1", "--out", "run"]) == 0
    capsys.readouterr()
    code = main(["eval", "--checkpoint", "run/checkpoint.json", "--kind", "noisy-patterns",
                 "--n", "50", "--side", "6"])
    assert code == 2
    err = capsys.readouterr().err
    assert "(64, 64)" in err and "(36, " in err


def test_eval_truncated_checkpoint(tmp_path, capsys):
    assert main(["train", "--task", "classify", "--n", "200", "--epochs", "1", "--out", "run"]) == 0
    path = tmp_path / "run" / "checkpoint.json"
    text = path.read_text()
    path.write_text(text[: len(text) // 3])
    assert main(["eval", "--checkpoint", str(path)]) == 4
    assert "version/format" in capsys.readouterr().err


def test_eval_wrong_version(tmp_path):
    assert main(["train", "--task", "classify", "--n", "200", "--epochs", "1", "--out", "run"]) == 0
    doc = read("run/checkpoint.json")
    doc["version"] = 2
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    assert main(["eval", "--checkpoint", "bad.json"]) == 4


def test_epochs_zero_checkpoint_is_initialisation():
    assert main(["train", "--task", "rul", "--units", "10", "--epochs", "0", "--seed", "4",
                 "--out", "run"]) == 0
    assert read("run/report.json")["epochs"] == []
    model, env = checkpoint.load("run/checkpoint.json")
    spec = dict(env["spec"])
    fresh = build_ccdnn(spec.pop("task"), **spec)
    np.testing.assert_array_equal(model.get_params(), fresh.get_params())
    assert spec["seed"] == 4


def test_divergence_exit_code(capsys):
    code = main(["train", "--task", "rul", "--units", "10", "--epochs", "5", "--lr", "10",
                 "--out", "run"])
    assert code == 3
    assert "diverged" in capsys.readouterr().err
    rep = read("run/report.json")
    assert rep["diverged_at_epoch"] >= 1
    assert len(rep["epochs"]) == rep["diverged_at_epoch"] - 1


def test_dcca_baseline_and_plain_labels():
    assert main(["train", "--task", "dcca-baseline", "--n", "200", "--epochs", "1", "--out", "a"]) == 0
    assert read("a/report.json")["label"] == "DCCA"
    assert main(["train", "--task", "classify", "--n", "200", "--epochs", "1", "--plain",
                 "--out", "b"]) == 0
    assert read("b/report.json")["label"] == "plain"


def test_config_file_and_flag_precedence(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"task": "classify", "n": 200, "epochs": 2,
                                                 "batch-size": 32, "seed": 9}))
    assert main(["train", "--config", "c.json", "--epochs", "1", "--out", "run"]) == 0
    cfg = read("run/report.json")["config"]
    assert cfg["epochs"] == 1 and cfg["batch_size"] == 32 and cfg["seed"] == 9
    (tmp_path / "bad.json").write_text(json.dumps({"task": "classify", "colour": 1}))
    assert main(["train", "--config", "bad.json", "--out", "x"]) == 2


def test_env_seed_and_flag_override(monkeypatch):
    monkeypatch.setenv("CCGUIDE_SEED", "11")
    assert main(["gen", "--kind", "classification", "--n", "50", "--out", "e"]) == 0
    assert read("e/dataset.json")["seed"] == 11
    assert main(["gen", "--kind", "classification", "--n", "50", "--seed", "12", "--out", "f"]) == 0
    assert read("f/dataset.json")["seed"] == 12
    monkeypatch.setenv("CCGUIDE_SEED", "abc")
    assert main(["gen", "--kind", "classification", "--n", "50", "--out", "g"]) == 2


def test_training_is_reproducible():
    args = ["train", "--task", "classify", "--n", "200", "--epochs", "2", "--blocks", "2"]
    assert main(args + ["--out", "a"]) == 0
    assert main(args + ["--out", "b"]) == 0
    strip = lambda rep: [{k: v for k, v in e.items() if k != "seconds"} for e in rep["epochs"]]  # noqa: E731
    a, b = read("a/report.json"), read("b/report.json")
    assert strip(a) == strip(b) and a["final"] == b["final"]
    assert (read("a/checkpoint.json")["networks"] == read("b/checkpoint.json")["networks"])


def test_multiple_sources_rejected():
    assert main(["cca-fit", "--kind", "classification", "--csv", "x.csv"]) == 2


@pytest.mark.parametrize("cmd", ["gen", "train", "eval", "cca-fit"])
def test_help_pages(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        main([cmd, "--help"])
    assert info.value.code == 0
    assert "usage" in capsys.readouterr().out
