import json

import pytest

from diabml.cli import UsageError, build_config, main, parse_value, read_config_file
from diabml.synth import synth_dataset, write_csv

FAST = [
    "--population", "8", "--iterations", "3",
    "--set", "random_forest.n_trees=5",
    "--set", "linear_svm.epochs=2",
    "--set", "mlp.epochs=2",
    "--set", "adaboost.n_rounds=5",
]


@pytest.fixture(scope="module")
def csv_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "synth.csv"
    write_csv(synth_dataset(0, 800, flip_rate=0.05, imbalance=0.2), path)
    return path


@pytest.mark.parametrize(
    "text, value",
    [("on", True), ("Off", False), ("none", None), ("7", 7), ("0.25", 0.25), ("abc", "abc")],
)
def test_parse_value(text, value):
    assert parse_value(text) == value


def test_config_file_and_precedence(tmp_path, csv_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        f"# experiment\ndata: {csv_path}\nseed: 3\nbwo.subset_size: 5\nknn.k: 7\n"
        "smote.target_ratio: 0.5\nsurrogate.max_depth: 4\nclassifiers: knn, adaboost\n"
    )
    raw = read_config_file(cfg)
    raw["seed"] = "4"  # a later source wins
    config = build_config(raw)
    assert config.seed == 4
    assert config.bwo.subset_size == 5
    assert config.smote.target_ratio == 0.5
    assert config.classifier_settings == {"knn": {"k": 7}}
    assert config.surrogate_settings == {"max_depth": 4}
    assert [k.value for k in config.classifiers] == ["knn", "adaboost"]


@pytest.mark.parametrize(
    "raw",
    [
        {"data": "x.csv", "colour": "red"},
        {"data": "x.csv", "knn.depth": "3"},
        {"data": "x.csv", "classifiers": "knn,svm"},
        {"data": "x.csv", "feature_selection": "maybe"},
        {"seed": "1"},
    ],
)
def test_build_config_rejects(raw):
    with pytest.raises((UsageError, ValueError)):
        build_config(raw)


def test_bad_config_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed 3\n")
    with pytest.raises(UsageError, match="bad.cfg:1"):
        read_config_file(cfg)


def test_validate(csv_path, capsys):
    assert main(["validate", "--data", str(csv_path)]) == 0
    out = capsys.readouterr().out
    assert "rows_in: 800" in out and "features: 21" in out


def test_synth_command(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["synth", "--out", str(out), "--rows", "200", "--imbalance", "0.3"]) == 0
    assert "wrote 200 rows" in capsys.readouterr().out
    assert out.read_text().splitlines()[0].startswith("Diabetes_binary,f1,")


def test_run_writes_report_and_predict_scores_it(tmp_path, csv_path, capsys):
    out = tmp_path / "run"
    args = ["run", "--data", str(csv_path), "-o", str(out), "--classifiers", "knn,naive_bayes", "--save-models", *FAST]
    assert main(args) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert set(metrics["classifiers"]) == {"knn", "naive_bayes"}
    capsys.readouterr()

    values = ",".join(["0.5"] * 21)
    assert main(["predict", "--model", str(out / "models" / "knn.model"), "--values", values]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "label,score" and len(lines) == 2
    label, score = lines[1].split(",")
    assert int(label) == int(float(score) >= 0.5)

    assert main(["predict", "--model", str(out / "models" / "knn.model"), "--csv", str(csv_path)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 801


def test_compare_writes_grid(tmp_path, csv_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--data", str(csv_path), "-o", str(out), "--classifiers", "all", *FAST]) == 0
    assert len((out / "comparison.csv").read_text().splitlines()) == 9
    for variant in ("baseline", "smote", "fs", "smote_fs"):
        assert (out / variant / "summary.csv").is_file()
    assert (out / "smote_effect.csv").is_file() and (out / "fs_effect.csv").is_file()


def test_select_prints_subset(csv_path, capsys):
    assert main(["select", "--data", str(csv_path), "--subset-size", "4", *FAST]) == 0
    out = capsys.readouterr().out
    selected = out.splitlines()[0]
    assert selected.startswith("selected: ") and len(selected.split(":")[1].split(";")) == 4
    assert "iteration,best_fitness,best_subset" in out


@pytest.mark.parametrize(
    "argv, stage",
    [
        (["run", "--data", "/nonexistent.csv"], "[load]"),
        (["run", "--set", "colour=red", "--data", "x.csv"], "[config]"),
        (["validate", "--data", "/nonexistent.csv"], "[validate]"),
    ],
)
def test_errors_exit_2_with_stage(argv, stage, capsys):
    assert main(argv) == 2
    assert stage in capsys.readouterr().err


def test_predict_rejects_wrong_width(tmp_path, csv_path, capsys):
    out = tmp_path / "run"
    main(["run", "--data", str(csv_path), "-o", str(out), "--classifiers", "naive_bayes", "--save-models",
          "--no-feature-selection"])
    assert main(["predict", "--model", str(out / "models" / "naive_bayes.model"), "--values", "1,2"]) == 2
    assert "expected 21 feature values" in capsys.readouterr().err
