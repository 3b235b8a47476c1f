"""SMOTE + BWO accuracies on the public diabetes-indicator CSV.

Usage: python scripts/reference_run.py path/to/diabetes_binary_health_indicators_BRFSS2015.csv
Runs the full four-variant comparison and prints the SMOTE + selection
accuracies next to the reference accuracies.
"""

import argparse
import time

from diabml.pipeline import PipelineConfig, compare_variants, emit_report

REFERENCE_ACCURACY = {
    "logistic_regression": 86.01,
    "decision_tree": 86.08,
    "random_forest": 85.12,
    "mlp": 86.01,
    "adaboost": 86.1,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("data")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", default="reference_out")
    args = parser.parse_args()

    start = time.perf_counter()
    table = compare_variants(PipelineConfig(data_path=args.data, seed=args.seed))
    emit_report(table, args.output)
    print(f"{'classifier':22s}{'accuracy %':>12s}{'reference':>12s}{'delta':>8s}")
    for kind in table.classifiers:
        acc = 100 * table.cell(kind, "smote_fs").accuracy
        pub = REFERENCE_ACCURACY.get(kind)
        extra = f"{pub:12.2f}{acc - pub:8.2f}" if pub is not None else f"{'-':>12s}"
        print(f"{kind:22s}{acc:12.2f}{extra}")
    print(f"selected features: {table.reports['smote_fs'].selected.one_based()}")
    print(f"elapsed {time.perf_counter() - start:.0f}s; files in {args.output}")


if __name__ == "__main__":
    main()
