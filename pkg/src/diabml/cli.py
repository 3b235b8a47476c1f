"""Command-line entry point.

Subcommands: validate, run, compare, select, predict, synth.

Settings come from an optional ``--config`` file of ``key: value`` lines
(``#`` starts a comment), then from ``--set key=value`` pairs, then from
the dedicated flags; later sources win. Keys::

    data, label_column, test_fraction, seed, normalize (train|all),
    feature_selection (on|off), imbalance_handling (on|off),
    classifiers (comma list), output, save_models (on|off),
    bwo.<field>        any BwoConfig field, e.g. bwo.subset_size
    smote.<field>      k_neighbors, target_ratio
    surrogate.kind, surrogate.max_rows, surrogate.holdout,
    surrogate.<setting> classifier setting of the surrogate, e.g. surrogate.max_depth
    <kind>.<setting>   per-classifier setting, e.g. knn.k, random_forest.n_trees
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from diabml import dataio, pipeline
from diabml.balance import SmoteConfig, smote_oversample
from diabml.bwo import BwoConfig, SurrogateFitness, bwo_optimize
from diabml.classifiers import ClassifierConfig, ClassifierKind
from diabml.synth import PLANTED_INFORMATIVE, synth_dataset, write_csv

log = logging.getLogger("diabml")

_BOOL = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False}
_KINDS = {k.value for k in ClassifierKind}


class UsageError(ValueError):
    pass


def parse_value(text: str) -> Any:
    text = text.strip()
    low = text.lower()
    if low in _BOOL:
        return _BOOL[low]
    if low in ("none", "null"):
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_config_file(path) -> dict[str, Any]:
    settings = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition(":")
            if not sep or not key.strip():
                raise UsageError(f"{path}:{lineno}: expected 'key: value'")
            settings[key.strip()] = value.strip()
    return settings


def build_config(raw: dict[str, Any]) -> pipeline.PipelineConfig:
    """Turn flat string settings into a :class:`PipelineConfig`."""
    top, bwo, smote, surrogate, per_kind = {}, {}, {}, {}, {}
    bwo_fields = {f.name for f in dataclasses.fields(BwoConfig)}
    smote_fields = {"k_neighbors", "target_ratio"}
    for key, text in raw.items():
        value = parse_value(text) if isinstance(text, str) else text
        head, _, rest = key.partition(".")
        if head == "bwo" and rest in bwo_fields:
            bwo[rest] = value
        elif head == "smote" and rest in smote_fields:
            smote[rest] = value
        elif head == "surrogate" and rest:
            surrogate[rest] = value
        elif head in _KINDS and rest:
            per_kind.setdefault(head, {})[rest] = value
        elif not rest:
            top[head] = text if head in ("data", "output", "label_column") else value
        else:
            raise UsageError(f"unknown setting {key!r}")

    kwargs: dict[str, Any] = {}
    renames = {
        "data": "data_path",
        "output": "output_dir",
        "label_column": "label_column",
        "test_fraction": "test_fraction",
        "seed": "seed",
        "normalize": "normalize",
        "feature_selection": "feature_selection",
        "imbalance_handling": "imbalance_handling",
        "save_models": "save_models",
    }
    for key, value in top.items():
        if key == "classifiers":
            names = [n.strip() for n in str(value).split(",") if n.strip()]
            if names == ["all"]:
                names = sorted(_KINDS, key=[k.value for k in ClassifierKind].index)
            bad = [n for n in names if n not in _KINDS]
            if bad:
                raise UsageError(f"unknown classifiers: {bad}")
            kwargs["classifiers"] = tuple(names)
        elif key in renames:
            kwargs[renames[key]] = value
        else:
            raise UsageError(f"unknown setting {key!r}")
    for flag in ("feature_selection", "imbalance_handling", "save_models"):
        if flag in kwargs and not isinstance(kwargs[flag], bool):
            raise UsageError(f"{flag} must be on or off")
    if bwo:
        kwargs["bwo"] = BwoConfig(**bwo)
    if smote:
        kwargs["smote"] = SmoteConfig(**smote)
    if surrogate:
        if "kind" in surrogate:
            kwargs["surrogate_kind"] = surrogate.pop("kind")
        if "max_rows" in surrogate:
            kwargs["surrogate_max_rows"] = int(surrogate.pop("max_rows"))
        if "holdout" in surrogate:
            kwargs["surrogate_holdout"] = float(surrogate.pop("holdout"))
        if surrogate:
            kwargs["surrogate_settings"] = surrogate
    if per_kind:
        for kind, settings in per_kind.items():
            ClassifierConfig(kind, settings)  # validates setting names
        kwargs["classifier_settings"] = per_kind
    if "data_path" not in kwargs:
        raise UsageError("no data file given (use --data or 'data:' in the config)")
    return pipeline.PipelineConfig(**kwargs)


def _collect(args) -> dict[str, Any]:
    raw: dict[str, Any] = {}
    if getattr(args, "config", None):
        raw.update(read_config_file(args.config))
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        raw[key.strip()] = value.strip()
    flags = {
        "data": "data",
        "label_column": "label_column",
        "test_fraction": "test_fraction",
        "seed": "seed",
        "normalize": "normalize",
        "classifiers": "classifiers",
        "output": "output",
        "feature_selection": "feature_selection",
        "imbalance_handling": "imbalance_handling",
        "subset_size": "bwo.subset_size",
        "population": "bwo.population_size",
        "iterations": "bwo.max_iterations",
        "save_models": "save_models",
    }
    for attr, key in flags.items():
        value = getattr(args, attr, None)
        if value is not None:
            if isinstance(value, bool):
                value = "on" if value else "off"
            raw[key] = str(value)
    return raw


def _add_pipeline_flags(p: argparse.ArgumentParser, output: bool = True) -> None:
    p.add_argument("--config", help="key: value settings file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one setting")
    p.add_argument("--data", help="input CSV path")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--normalize", choices=("train", "all"))
    p.add_argument("--classifiers", help="comma-separated kinds, or 'all'")
    p.add_argument("--subset-size", dest="subset_size", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument(
        "--feature-selection", dest="feature_selection",
        action=argparse.BooleanOptionalAction, default=None,
    )
    p.add_argument(
        "--smote", dest="imbalance_handling",
        action=argparse.BooleanOptionalAction, default=None,
    )
    if output:
        p.add_argument("--output", "-o", help="output directory")
        p.add_argument(
            "--save-models", dest="save_models",
            action=argparse.BooleanOptionalAction, default=None,
        )


def _print_metrics(report: pipeline.RunReport) -> None:
    print(f"variant {report.variant}: features {report.selected.one_based()}")
    print(f"{'classifier':22s}" + "".join(f"{m:>12s}" for m in (*pipeline.METRIC_NAMES, "auc")))
    for kind, m in report.metrics.items():
        vals = [getattr(m, n) for n in pipeline.METRIC_NAMES] + [report.auc[kind]]
        print(f"{kind:22s}" + "".join(f"{v:12.4f}" for v in vals))


def _print_timings(timings: dict[str, float]) -> None:
    for stage, secs in timings.items():
        log.info("stage %-28s %8.2fs", stage, secs)


def cmd_validate(args) -> int:
    data = dataio.load_csv(args.data, args.label_column, allow_nonfinite=True)
    cleaned, report = dataio.clean(data)
    neg, pos = cleaned.class_counts()
    print(report.to_text(), end="")
    print(f"features: {cleaned.n_features}")
    print(f"class_0: {neg}")
    print(f"class_1: {pos}")
    return 0


def cmd_run(args) -> int:
    config = build_config(_collect(args))
    report = pipeline.run_experiment(config)
    _print_metrics(report)
    _print_timings(report.timings)
    if config.output_dir:
        files = pipeline.emit_report(report, config.output_dir, config.save_models)
        print(f"wrote {len(files)} files to {config.output_dir}")
    return 0


def cmd_compare(args) -> int:
    config = build_config(_collect(args))
    table = pipeline.compare_variants(config)
    for name in table.variants:
        _print_metrics(table.reports[name])
        _print_timings(table.reports[name].timings)
    if config.output_dir:
        files = pipeline.emit_report(table, config.output_dir, config.save_models)
        print(f"wrote {len(files)} files to {config.output_dir}")
    return 0


def cmd_select(args) -> int:
    config = build_config(_collect(args))
    prep = pipeline._prepare(config)
    data = prep.scaled
    tr = prep.split.train_rows
    X, y = data.features[tr], data.labels[tr]
    if config.imbalance_handling:
        X, y = smote_oversample(X, y, dataclasses.replace(config.smote, seed=config.seed))
    fitness = SurrogateFitness(
        dataio.Dataset(data.feature_names, X, y),
        ClassifierConfig(config.surrogate_kind, dict(config.surrogate_settings), config.seed),
        max_rows=config.surrogate_max_rows,
        holdout=config.surrogate_holdout,
        seed=config.seed,
    )
    best, trace = bwo_optimize(
        fitness, dataclasses.replace(config.bwo, seed=config.seed), data.n_features
    )
    print("selected: " + ";".join(map(str, best.subset.one_based())))
    print("names: " + ";".join(data.feature_names[i] for i in best.subset.key()))
    print(f"fitness: {best.fitness!r}")
    print(trace.to_csv(), end="")
    if config.output_dir:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / pipeline.TRACE_FILE).write_text(trace.to_csv(), encoding="utf-8")
    return 0


def cmd_predict(args) -> int:
    bundle = pipeline.load_bundle(args.model)
    if args.values is not None:
        rows = [[float(v) for v in args.values.split(",")]]
    else:
        with open(args.csv, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [n for n in bundle.feature_names if n not in (reader.fieldnames or [])]
            if missing:
                raise UsageError(f"{args.csv}: missing columns {missing}")
            rows = [[float(r[n]) for n in bundle.feature_names] for r in reader]
    scores = bundle.scores(np.array(rows))
    print("label,score")
    for s in scores:
        print(f"{int(s >= 0.5)},{float(s)!r}")
    return 0


def cmd_synth(args) -> int:
    informative = (
        [int(i) - 1 for i in args.informative.split(",")]
        if args.informative
        else list(PLANTED_INFORMATIVE)
    )
    data = synth_dataset(
        args.seed, args.rows, informative, args.noise_features, args.flip_rate, args.imbalance
    )
    write_csv(data, args.out, args.label_column)
    neg, pos = data.class_counts()
    print(f"wrote {data.n_rows} rows ({pos} positive) x {data.n_features} features to {args.out}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diabml", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and clean a CSV, print the cleaning report")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", dest="label_column", default=dataio.DEFAULT_LABEL_COLUMN)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one experiment")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run the four ablation variants")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("select", help="run BWO feature selection only")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("predict", help="score rows with a saved model bundle")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--values", help="comma-separated raw feature values, in training column order")
    group.add_argument("--csv", help="CSV with a header naming the training feature columns")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="write a synthetic planted-feature CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--rows", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--informative", help="one-based comma list (default: 9 spread columns)")
    p.add_argument("--noise-features", dest="noise_features", type=int, default=12)
    p.add_argument("--flip-rate", dest="flip_rate", type=float, default=0.05)
    p.add_argument("--imbalance", type=float, default=0.14)
    p.add_argument("--label-column", dest="label_column", default=dataio.DEFAULT_LABEL_COLUMN)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except pipeline.PipelineError as exc:
        print(f"diabml {args.command}: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, OSError) as exc:
        stage = "config" if isinstance(exc, UsageError) else args.command
        print(f"diabml {args.command}: [{stage}] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
