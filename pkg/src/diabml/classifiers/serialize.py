"""Versioned flat-text model files.

Layout, one item per line::

    diabml-model 1
    kind <kind>
    n_features <int>
    setting <name> <json value>
    array <name> <float|int> <dim,dim,...|scalar>
    <space-separated values, floats in repr() form>
    end

Floats are written with ``repr`` so reading a file back reproduces every
parameter bit for bit.
"""

from __future__ import annotations

import json
from typing import IO

import numpy as np

from diabml.classifiers.core import ClassifierError, TrainedModel

MAGIC = "diabml-model"
VERSION = 1


def _fmt(arr: np.ndarray) -> str:
    if arr.dtype.kind == "f":
        return " ".join(repr(float(v)) for v in arr.ravel())
    return " ".join(str(int(v)) for v in arr.ravel())


def dumps_model(model: TrainedModel) -> str:
    lines = [f"{MAGIC} {VERSION}", f"kind {model.kind.value}", f"n_features {model.n_features}"]
    for name in sorted(model.settings):
        lines.append(f"setting {name} {json.dumps(model.settings[name])}")
    for name in sorted(model.params):
        arr = np.asarray(model.params[name])
        dtype = "float" if arr.dtype.kind == "f" else "int"
        shape = ",".join(map(str, arr.shape)) if arr.ndim else "scalar"
        lines.append(f"array {name} {dtype} {shape}")
        lines.append(_fmt(arr))
    lines.append("end")
    return "\n".join(lines) + "\n"


def read_model(lines) -> TrainedModel:
    """Parse one model block from an iterator of text lines."""
    it = iter(lines)

    def next_line():
        try:
            return next(it).rstrip("\n")
        except StopIteration:
            raise ClassifierError("model file truncated") from None

    head = next_line().split()
    if len(head) != 2 or head[0] != MAGIC:
        raise ClassifierError("not a diabml model file")
    if int(head[1]) != VERSION:
        raise ClassifierError(f"unsupported model format version {head[1]}")
    kind = n_features = None
    settings, params = {}, {}
    while True:
        line = next_line()
        tag, _, rest = line.partition(" ")
        if tag == "end":
            break
        if tag == "kind":
            kind = rest.strip()
        elif tag == "n_features":
            n_features = int(rest)
        elif tag == "setting":
            name, _, value = rest.partition(" ")
            settings[name] = json.loads(value)
        elif tag == "array":
            name, dtype, shape = rest.split()
            values = next_line().split()
            arr = np.array(
                [float(v) for v in values] if dtype == "float" else [int(v) for v in values],
                dtype=np.float64 if dtype == "float" else np.int64,
            )
            arr = arr.reshape(()) if shape == "scalar" else arr.reshape(
                tuple(int(d) for d in shape.split(","))
            )
            params[name] = arr
        else:
            raise ClassifierError(f"unexpected model line: {line[:40]!r}")
    if kind is None or n_features is None:
        raise ClassifierError("model file lacks kind or n_features")
    return TrainedModel(kind, n_features, params, settings)


def loads_model(text: str) -> TrainedModel:
    return read_model(text.splitlines())


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return read_model(fh)
