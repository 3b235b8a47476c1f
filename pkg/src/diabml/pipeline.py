"""End-to-end experiment: load, clean, split, scale, SMOTE, BWO, train, evaluate.

Every random stage draws from ``PipelineConfig.seed`` so a report is a pure
function of its config. Wall-clock timings are kept on the in-memory
report only and never written to disk, which keeps emitted files
byte-identical across reruns.
"""

from __future__ import annotations

import contextlib
import csv
import dataclasses
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from diabml import balance, dataio
from diabml.balance import SmoteConfig, smote_oversample
from diabml.bwo import (
    BwoConfig,
    BwoTrace,
    FeatureSubset,
    SurrogateFitness,
    bwo_optimize,
)
from diabml.classifiers import (
    ALL_KINDS,
    ClassifierConfig,
    ClassifierKind,
    TrainedModel,
    dumps_model,
    predict_scores,
    read_model,
    train,
)
from diabml.dataio import CleanReport, Dataset, ScalerParams
from diabml.metrics import MetricsReport, RocCurve, auc, evaluate, roc_curve

log = logging.getLogger(__name__)

VARIANTS: dict[str, tuple[bool, bool]] = {
    # name: (imbalance handling, feature selection)
    "baseline": (False, False),
    "smote": (True, False),
    "fs": (False, True),
    "smote_fs": (True, True),
}
METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "precision", "f1", "mcc")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    data_path: str | None = None
    label_column: str = dataio.DEFAULT_LABEL_COLUMN
    test_fraction: float = 0.2
    seed: int = 0
    feature_selection: bool = True
    bwo: BwoConfig = field(default_factory=BwoConfig)
    imbalance_handling: bool = True
    smote: SmoteConfig = field(default_factory=SmoteConfig)
    classifiers: tuple[ClassifierKind, ...] = ALL_KINDS
    classifier_settings: dict[str, dict[str, Any]] = field(default_factory=dict)
    output_dir: str | None = None
    # "train": fit the scaler on training rows; "all": on every row before the split
    normalize: str = "train"
    surrogate_kind: ClassifierKind = ClassifierKind.DECISION_TREE
    surrogate_settings: dict[str, Any] = field(default_factory=lambda: {"max_depth": 8})
    surrogate_max_rows: int = 20_000
    surrogate_holdout: float = 0.25
    save_models: bool = False
    # in-memory data used instead of data_path when given
    dataset: Dataset | None = None

    def __post_init__(self):
        self.classifiers = tuple(ClassifierKind(k) for k in self.classifiers)
        self.surrogate_kind = ClassifierKind(self.surrogate_kind)
        if not self.classifiers:
            raise ValueError("at least one classifier is required")
        if len(set(self.classifiers)) != len(self.classifiers):
            raise ValueError("classifier list has duplicates")
        if self.normalize not in ("train", "all"):
            raise ValueError(f"normalize must be 'train' or 'all', got {self.normalize!r}")
        if self.data_path is None and self.dataset is None:
            raise ValueError("either data_path or dataset is required")

    def classifier_config(self, kind: ClassifierKind) -> ClassifierConfig:
        return ClassifierConfig(kind, dict(self.classifier_settings.get(kind.value, {})), self.seed)


@dataclass
class RunReport:
    variant: str
    feature_names: tuple[str, ...]
    selected: FeatureSubset
    metrics: dict[str, MetricsReport]
    auc: dict[str, float]
    roc: dict[str, RocCurve]
    clean_report: CleanReport
    class_counts_before: tuple[int, int]
    class_counts_after: tuple[int, int]
    n_train: int
    n_test: int
    trace: BwoTrace | None = None
    timings: dict[str, float] = field(default_factory=dict)
    models: dict[str, TrainedModel] = field(default_factory=dict)
    scaler: ScalerParams | None = None
    # row-provenance tags: indices into the cleaned dataset (-1 = synthetic)
    provenance: dict[str, np.ndarray] = field(default_factory=dict)

    def accuracy(self, kind) -> float:
        return self.metrics[str(kind)].accuracy

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "feature_names": list(self.feature_names),
            "selected_features": self.selected.one_based(),
            "selected_feature_names": [self.feature_names[i] for i in self.selected.key()],
            "class_counts_before_smote": list(self.class_counts_before),
            "class_counts_after_smote": list(self.class_counts_after),
            "n_train": self.n_train,
            "n_test": self.n_test,
            "clean": dataclasses.asdict(self.clean_report),
            "classifiers": {
                kind: {**m.to_dict(), "auc": self.auc[kind]} for kind, m in self.metrics.items()
            },
        }


@dataclass
class ComparisonTable:
    classifiers: tuple[str, ...]
    variants: tuple[str, ...]
    reports: dict[str, RunReport]

    def cell(self, classifier, variant) -> MetricsReport:
        return self.reports[variant].metrics[str(classifier)]


@dataclass
class _Prepared:
    data: Dataset
    clean_report: CleanReport
    split: dataio.SplitIndices
    scaled: Dataset
    scaler: ScalerParams
    scaler_rows: np.ndarray
    timings: dict[str, float]


@contextlib.contextmanager
def _stage(name: str, timings: dict[str, float]):
    start = time.perf_counter()
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


def _prepare(config: PipelineConfig) -> _Prepared:
    timings: dict[str, float] = {}
    with _stage("load", timings):
        raw = config.dataset
        if raw is None:
            raw = dataio.load_csv(config.data_path, config.label_column, allow_nonfinite=True)
    with _stage("clean", timings):
        data, report = dataio.clean(raw)
    with _stage("split", timings):
        split = dataio.stratified_split(data, config.test_fraction, config.seed)
    with _stage("normalize", timings):
        rows = split.train_rows if config.normalize == "train" else np.arange(data.n_rows)
        scaler = dataio.fit_minmax(data, rows)
        scaled = dataio.apply_minmax(data, scaler)
    return _Prepared(data, report, split, scaled, scaler, rows, timings)


def _run_variant(
    prep: _Prepared, config: PipelineConfig, variant: str, smote_on: bool, fs_on: bool
) -> RunReport:
    timings = dict(prep.timings)
    data = prep.scaled
    tr = prep.split.train_rows
    X_train, y_train = data.features[tr], data.labels[tr]
    origin = np.asarray(tr, dtype=np.int64)
    before = (int((y_train == 0).sum()), int((y_train == 1).sum()))

    if smote_on:
        with _stage("smote", timings):
            smote_cfg = dataclasses.replace(config.smote, seed=config.seed)
            X_train, y_train = smote_oversample(X_train, y_train, smote_cfg)
            origin = np.concatenate(
                [origin, np.full(X_train.shape[0] - origin.size, -1, dtype=np.int64)]
            )
    after = (int((y_train == 0).sum()), int((y_train == 1).sum()))

    trace = None
    fitness_rows = np.empty(0, dtype=np.int64)
    selected = FeatureSubset.full(data.n_features)
    if fs_on:
        with _stage("feature_selection", timings):
            fitness = SurrogateFitness(
                Dataset(data.feature_names, X_train, y_train),
                ClassifierConfig(config.surrogate_kind, dict(config.surrogate_settings), config.seed),
                max_rows=config.surrogate_max_rows,
                holdout=config.surrogate_holdout,
                seed=config.seed,
                row_ids=origin,
            )
            bwo_cfg = dataclasses.replace(config.bwo, seed=config.seed)
            best, trace = bwo_optimize(fitness, bwo_cfg, data.n_features)
            selected = best.subset
            fitness_rows = np.unique(fitness.row_ids)
            log.info("%s: selected features %s", variant, selected.one_based())

    cols = list(selected.key())
    X_train = X_train[:, cols]
    X_test = data.features[np.ix_(prep.split.test_rows, cols)]
    y_test = data.labels[prep.split.test_rows]

    metrics, aucs, rocs, models = {}, {}, {}, {}
    for kind in config.classifiers:
        name = kind.value
        with _stage(f"train:{name}", timings):
            model = train(config.classifier_config(kind), X_train, y_train)
        with _stage(f"evaluate:{name}", timings):
            scores = predict_scores(model, X_test)
            metrics[name] = evaluate(y_test, (scores >= 0.5).astype(np.int8))
            rocs[name] = roc_curve(y_test, scores)
            aucs[name] = auc(rocs[name])
        models[name] = model

    return RunReport(
        variant=variant,
        feature_names=data.feature_names,
        selected=selected,
        metrics=metrics,
        auc=aucs,
        roc=rocs,
        clean_report=prep.clean_report,
        class_counts_before=before,
        class_counts_after=after,
        n_train=int(X_train.shape[0]),
        n_test=int(X_test.shape[0]),
        trace=trace,
        timings=timings,
        models=models,
        scaler=prep.scaler,
        provenance={
            "train_rows": np.asarray(prep.split.train_rows),
            "test_rows": np.asarray(prep.split.test_rows),
            "scaler_rows": np.asarray(prep.scaler_rows),
            "train_matrix_rows": origin,
            "fitness_rows": fitness_rows,
        },
    )


def _variant_name(smote_on: bool, fs_on: bool) -> str:
    return {v: k for k, v in VARIANTS.items()}[(smote_on, fs_on)]


def run_experiment(config: PipelineConfig) -> RunReport:
    prep = _prepare(config)
    smote_on, fs_on = config.imbalance_handling, config.feature_selection
    return _run_variant(prep, config, _variant_name(smote_on, fs_on), smote_on, fs_on)


def compare_variants(config: PipelineConfig, variants=tuple(VARIANTS)) -> ComparisonTable:
    """Run the ablation grid on one shared split and seed."""
    prep = _prepare(config)
    reports = {}
    for name in variants:
        smote_on, fs_on = VARIANTS[name]
        log.info("running variant %s", name)
        reports[name] = _run_variant(prep, config, name, smote_on, fs_on)
    return ComparisonTable(
        classifiers=tuple(k.value for k in config.classifiers),
        variants=tuple(variants),
        reports=reports,
    )


# --- report files -----------------------------------------------------------

METRICS_FILE = "metrics.json"
SUMMARY_FILE = "summary.csv"
FEATURES_FILE = "selected_features.txt"
TRACE_FILE = "bwo_trace.csv"
CLEAN_FILE = "clean_report.txt"
COMPARISON_FILE = "comparison.csv"
SMOTE_EFFECT_FILE = "smote_effect.csv"
FS_EFFECT_FILE = "fs_effect.csv"
MODEL_DIR = "models"


def roc_file(kind: str) -> str:
    return f"roc_{kind}.csv"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _fmt(x: float) -> str:
    return repr(float(x))


def features_text(report: RunReport) -> str:
    rows = [("index", "name")] + [
        (i + 1, report.feature_names[i]) for i in report.selected.key()
    ]
    return _csv_text(rows)


def _emit_run(report: RunReport, out: Path, save_models: bool) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = [
        _write(out / METRICS_FILE, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"),
        _write(out / FEATURES_FILE, features_text(report)),
        _write(out / CLEAN_FILE, report.clean_report.to_text()),
    ]
    summary = [("classifier", *METRIC_NAMES, "auc")]
    for kind, m in report.metrics.items():
        summary.append((kind, *(_fmt(getattr(m, n)) for n in METRIC_NAMES), _fmt(report.auc[kind])))
        written.append(_write(out / roc_file(kind), report.roc[kind].to_csv()))
    written.append(_write(out / SUMMARY_FILE, _csv_text(summary)))
    if report.trace is not None:
        written.append(_write(out / TRACE_FILE, report.trace.to_csv()))
    if save_models:
        (out / MODEL_DIR).mkdir(exist_ok=True)
        for kind, model in report.models.items():
            written.append(_write(out / MODEL_DIR / f"{kind}.model", bundle_text(report, model)))
    return written


def _direction(delta: float) -> str:
    if delta > 0:
        return "up"
    if delta < 0:
        return "down"
    return "same"


def _emit_comparison(table: ComparisonTable, out: Path, save_models: bool) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    header = ["classifier"] + [
        f"{v}_{m}" for v in table.variants for m in (*METRIC_NAMES, "auc")
    ]
    rows = [header]
    for kind in table.classifiers:
        row = [kind]
        for v in table.variants:
            m = table.cell(kind, v)
            row += [_fmt(getattr(m, n)) for n in METRIC_NAMES]
            row.append(_fmt(table.reports[v].auc[kind]))
        rows.append(row)
    written.append(_write(out / COMPARISON_FILE, _csv_text(rows)))

    pairs = [("baseline", "smote"), ("fs", "smote_fs")]
    pairs = [p for p in pairs if all(v in table.reports for v in p)]
    if pairs:
        rows = [["classifier", "without", "with", "metric", "value_without", "value_with", "direction"]]
        for kind in table.classifiers:
            for lo, hi in pairs:
                for metric in ("sensitivity", "precision", "f1", "mcc"):
                    a = getattr(table.cell(kind, lo), metric)
                    b = getattr(table.cell(kind, hi), metric)
                    rows.append([kind, lo, hi, metric, _fmt(a), _fmt(b), _direction(b - a)])
        written.append(_write(out / SMOTE_EFFECT_FILE, _csv_text(rows)))

    pairs = [("baseline", "fs"), ("smote", "smote_fs")]
    pairs = [p for p in pairs if all(v in table.reports for v in p)]
    if pairs:
        rows = [["classifier", "without", "with", "accuracy_without", "accuracy_with", "delta", "direction"]]
        for kind in table.classifiers:
            for lo, hi in pairs:
                a = table.cell(kind, lo).accuracy
                b = table.cell(kind, hi).accuracy
                rows.append([kind, lo, hi, _fmt(a), _fmt(b), _fmt(b - a), _direction(b - a)])
        written.append(_write(out / FS_EFFECT_FILE, _csv_text(rows)))

    for v, report in table.reports.items():
        written += _emit_run(report, out / v, save_models)
    return written


def emit_report(report: RunReport | ComparisonTable, directory, save_models: bool = False) -> list[Path]:
    """Write the report's files under ``directory``; returns the paths written."""
    out = Path(directory)
    if isinstance(report, ComparisonTable):
        return _emit_comparison(report, out, save_models)
    return _emit_run(report, out, save_models)


# --- prediction bundles -------------------------------------------------------

BUNDLE_MAGIC = "diabml-bundle 1"


def bundle_text(report: RunReport, model: TrainedModel) -> str:
    """Model file carrying the preprocessing needed to score raw rows."""
    lines = [
        BUNDLE_MAGIC,
        "feature_names " + json.dumps(list(report.feature_names)),
        "selected " + json.dumps(list(report.selected.key())),
        "scaler_min " + " ".join(_fmt(v) for v in report.scaler.minimum),
        "scaler_max " + " ".join(_fmt(v) for v in report.scaler.maximum),
    ]
    return "\n".join(lines) + "\n" + dumps_model(model)


@dataclass(frozen=True)
class Bundle:
    feature_names: tuple[str, ...]
    selected: tuple[int, ...]
    scaler: ScalerParams
    model: TrainedModel

    def scores(self, raw_rows) -> np.ndarray:
        X = np.atleast_2d(np.asarray(raw_rows, dtype=np.float64))
        if X.shape[1] != len(self.feature_names):
            raise ValueError(
                f"expected {len(self.feature_names)} feature values, got {X.shape[1]}"
            )
        X = dataio.minmax_transform(X, self.scaler)[:, list(self.selected)]
        return predict_scores(self.model, X)


def load_bundle(path) -> Bundle:
    with open(path, encoding="utf-8") as fh:
        if fh.readline().rstrip("\n") != BUNDLE_MAGIC:
            raise ValueError(f"{path}: not a diabml bundle")
        fields = {}
        for _ in range(4):
            tag, _, rest = fh.readline().rstrip("\n").partition(" ")
            fields[tag] = rest
        model = read_model(fh)
    return Bundle(
        feature_names=tuple(json.loads(fields["feature_names"])),
        selected=tuple(json.loads(fields["selected"])),
        scaler=ScalerParams(
            np.array([float(v) for v in fields["scaler_min"].split()]),
            np.array([float(v) for v in fields["scaler_max"].split()]),
        ),
        model=model,
    )


def smote_count_matches(report: RunReport, target_ratio: float) -> bool:
    """Post-SMOTE class counts agree with the oversampling formula."""
    neg, pos = report.class_counts_before
    n_min, n_maj = min(neg, pos), max(neg, pos)
    expected_min = n_min + balance.synthetic_count(n_min, n_maj, target_ratio)
    return sorted(report.class_counts_after) == sorted((expected_min, n_maj)) or (
        neg == pos and report.class_counts_after == report.class_counts_before
    )
