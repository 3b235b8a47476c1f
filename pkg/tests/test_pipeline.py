import json

import numpy as np
import pytest

from diabml.balance import SmoteConfig
from diabml.bwo import BwoConfig
from diabml.classifiers import ALL_KINDS, ClassifierConfig, predict_labels, predict_scores, train
from diabml.dataio import Dataset
from diabml.pipeline import (
    VARIANTS,
    PipelineConfig,
    PipelineError,
    compare_variants,
    emit_report,
    load_bundle,
    run_experiment,
    smote_count_matches,
)
from diabml.synth import PLANTED_INFORMATIVE, synth_dataset, write_csv

SMALL_BWO = BwoConfig(population_size=10, max_iterations=4)
FAST_SETTINGS = {
    "random_forest": {"n_trees": 5},
    "linear_svm": {"epochs": 2},
    "mlp": {"epochs": 3},
    "adaboost": {"n_rounds": 10},
}


def small_config(**overrides):
    base = dict(
        dataset=synth_dataset(0, 1500, flip_rate=0.05, imbalance=0.2),
        bwo=SMALL_BWO,
        classifier_settings=FAST_SETTINGS,
    )
    base.update(overrides)
    return PipelineConfig(**base)


@pytest.fixture(scope="module")
def table():
    return compare_variants(small_config())


def test_synth_prevalence_and_noiseless_tree():
    data = synth_dataset(3, 5000, imbalance=0.14)
    assert abs(data.labels.mean() - 0.14) <= 0.01
    clean = synth_dataset(3, 500)
    cols = list(PLANTED_INFORMATIVE)
    model = train(ClassifierConfig("decision_tree", {"max_depth": 40}), clean.features[:, cols], clean.labels)
    assert np.mean(predict_labels(model, clean.features[:, cols]) == clean.labels) == 1.0


@pytest.mark.parametrize("kwargs", [{"flip_rate": 0.5}, {"imbalance": 0.0}, {"informative": (0, 0)}])
def test_synth_rejects_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        synth_dataset(0, 100, **kwargs)


def test_selection_off_keeps_every_feature():
    report = run_experiment(small_config(feature_selection=False, classifiers=("naive_bayes",)))
    assert report.selected.key() == tuple(range(21))
    assert report.trace is None


def test_comparison_grid_complete(table):
    assert table.variants == tuple(VARIANTS)
    assert table.classifiers == tuple(k.value for k in ALL_KINDS)
    for v in table.variants:
        assert set(table.reports[v].metrics) == set(table.classifiers)


def test_variants_share_split(table):
    splits = {
        v: (tuple(r.provenance["train_rows"]), tuple(r.provenance["test_rows"]))
        for v, r in table.reports.items()
    }
    assert len(set(splits.values())) == 1


def test_test_rows_never_touched(table):
    for report in table.reports.values():
        test = set(report.provenance["test_rows"].tolist())
        assert test.isdisjoint(report.provenance["scaler_rows"].tolist())
        assert test.isdisjoint(report.provenance["train_matrix_rows"].tolist())
        assert test.isdisjoint(report.provenance["fitness_rows"].tolist())


def test_fit_on_all_mode_is_recorded():
    report = run_experiment(small_config(normalize="all", classifiers=("knn",), feature_selection=False))
    prov = report.provenance
    assert prov["scaler_rows"].size == prov["train_rows"].size + prov["test_rows"].size


def test_smote_counts_follow_formula(table):
    for v in ("smote", "smote_fs"):
        assert smote_count_matches(table.reports[v], 1.0)
    partial = run_experiment(
        small_config(smote=SmoteConfig(target_ratio=0.5), feature_selection=False, classifiers=("knn",))
    )
    assert smote_count_matches(partial, 0.5)
    neg, pos = partial.class_counts_after
    assert pos == int(np.ceil(0.5 * neg))


def test_baseline_counts_untouched(table):
    r = table.reports["baseline"]
    assert r.class_counts_before == r.class_counts_after


def test_run_files(tmp_path, table):
    written = emit_report(table.reports["smote_fs"], tmp_path)
    names = sorted(p.name for p in written)
    assert sum(n.startswith("roc_") for n in names) == 8
    assert names.count("metrics.json") == 1
    assert names.count("selected_features.txt") == 1
    assert "bwo_trace.csv" in names
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert set(metrics["classifiers"]) == {k.value for k in ALL_KINDS}
    features = (tmp_path / "selected_features.txt").read_text().splitlines()
    assert features[0] == "index,name" and len(features) == 10


def test_comparison_csv_shape(tmp_path, table):
    emit_report(table, tmp_path)
    rows = (tmp_path / "comparison.csv").read_text().splitlines()
    assert len(rows) == 9
    header = rows[0].split(",")
    assert len(header) == 1 + 4 * 7
    for v in VARIANTS:
        assert f"{v}_accuracy" in header
    fs_rows = (tmp_path / "fs_effect.csv").read_text().splitlines()
    assert len(fs_rows) == 1 + 8 * 2


def test_rerun_is_byte_identical(tmp_path):
    config = small_config(classifiers=("decision_tree", "mlp", "random_forest"))
    emit_report(compare_variants(config), tmp_path / "a")
    emit_report(compare_variants(config), tmp_path / "b")
    emit_report(compare_variants(config), tmp_path / "a")
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_stage_errors_are_tagged(tmp_path):
    with pytest.raises(PipelineError, match=r"^\[load\]"):
        run_experiment(PipelineConfig(data_path=str(tmp_path / "missing.csv")))
    one_class = Dataset(("a",), np.arange(10.0)[:, None], np.zeros(10))
    with pytest.raises(PipelineError, match=r"^\[clean\]"):
        run_experiment(PipelineConfig(dataset=one_class))
    with pytest.raises(PipelineError, match=r"^\[split\]"):
        run_experiment(small_config(test_fraction=0.0001))


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig()
    with pytest.raises(ValueError):
        small_config(classifiers=())
    with pytest.raises(ValueError):
        small_config(normalize="before")


def test_csv_input_matches_in_memory(tmp_path):
    data = synth_dataset(2, 600, imbalance=0.3)
    path = tmp_path / "d.csv"
    write_csv(data, path)
    a = run_experiment(small_config(dataset=data, classifiers=("naive_bayes",)))
    b = run_experiment(small_config(dataset=None, data_path=str(path), classifiers=("naive_bayes",)))
    assert a.to_dict() == b.to_dict()


def test_bundle_scores_raw_rows(tmp_path, table):
    report = table.reports["smote_fs"]
    emit_report(report, tmp_path, save_models=True)
    bundle = load_bundle(tmp_path / "models" / "adaboost.model")
    assert bundle.selected == report.selected.key()
    raw = synth_dataset(0, 1500, flip_rate=0.05, imbalance=0.2).features[report.provenance["test_rows"]]
    cols = list(report.selected.key())
    scaled = np.clip((raw - report.scaler.minimum) / (report.scaler.maximum - report.scaler.minimum), 0, 1)
    expected = predict_scores(report.models["adaboost"], scaled[:, cols])
    np.testing.assert_allclose(bundle.scores(raw), expected, atol=1e-12)
    with pytest.raises(ValueError):
        bundle.scores(raw[:, :5])


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_planted_pipeline_adaboost_accuracy(seed):
    config = PipelineConfig(dataset=synth_dataset(seed, 20_000), seed=seed, classifiers=("adaboost",))
    report = run_experiment(config)
    assert report.accuracy("adaboost") >= 0.9, report.selected.one_based()
