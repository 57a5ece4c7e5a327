"""JSON interchange format for ``(M, C)`` models and the stock example models.

A model file is an object with keys ``d`` (int), ``M`` and ``C`` (``d`` rows of
``d`` numbers each), and optionally ``name`` (str) and ``node_labels`` (``d``
strings).  Floats are written with Python's shortest round-trip repr, at most
17 significant digits, so a write/read cycle is bit-exact.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_pair
from .acyclic import factor_model, path_model
from .exceptions import DimensionMismatchError, ModelError


@dataclass(frozen=True)
class ModelFile:
    M: np.ndarray
    C: np.ndarray
    name: str = None
    node_labels: list = field(default=None)

    @property
    def d(self):
        return self.M.shape[0]

    @property
    def matrices(self):
        return self.M, self.C

    def to_dict(self):
        out = {"d": self.d, "M": self.M.tolist(), "C": self.C.tolist()}
        if self.name is not None:
            out["name"] = self.name
        if self.node_labels is not None:
            out["node_labels"] = list(self.node_labels)
        return out


def parse_model(obj):
    """Validate a decoded JSON object and build a :class:`ModelFile`."""
    if not isinstance(obj, dict):
        raise ModelError("model file must hold a JSON object")
    missing = {"d", "M", "C"} - obj.keys()
    if missing:
        raise ModelError(f"model file lacks {sorted(missing)}")
    d = obj["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ModelError("'d' must be a positive integer")
    mats = []
    for key in ("M", "C"):
        rows = obj[key]
        if not isinstance(rows, list) or len(rows) != d or any(not isinstance(r, list) or len(r) != d for r in rows):
            raise DimensionMismatchError(f"'{key}' must be {d} rows of {d} numbers")
        if any(isinstance(x, bool) or not isinstance(x, (int, float)) for r in rows for x in r):
            raise ModelError(f"'{key}' must contain only numbers")
        mats.append(np.array(rows, dtype=float))
    M, C = check_pair(*mats)
    labels = obj.get("node_labels")
    if labels is not None and (
        not isinstance(labels, list) or len(labels) != d or not all(isinstance(s, str) for s in labels)
    ):
        raise ModelError("'node_labels' must be d strings")
    name = obj.get("name")
    if name is not None and not isinstance(name, str):
        raise ModelError("'name' must be a string")
    return ModelFile(M, C, name, labels)


def read_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path} is not valid JSON: {exc.msg}") from exc
    return parse_model(obj)


def dumps_model(model):
    return json.dumps(model.to_dict(), indent=2)


def write_model(model, path):
    Path(path).write_text(dumps_model(model) + "\n")


def cyclic_example():
    """The five-node cyclic model with unit diagonal volatility."""
    M = np.array(
        [
            [-1.0, 0.5, 0.0, 0.2, 0.0],
            [-1.0, -1.0, 0.2, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, -1.0, 1.0],
            [0.0, 0.0, 1.0, 0.0, -1.0],
        ]
    )
    return ModelFile(M, np.eye(5), name="example13")


def path_model_file(d, zeta, gamma):
    M, C = path_model(d, zeta, gamma)
    return ModelFile(M, C, name=f"path d={d} zeta={zeta!r} gamma={gamma!r}")


def factor_model_file(m_diag, loadings, c_diag):
    M, C = factor_model(m_diag, loadings, c_diag)
    return ModelFile(M, C, name="factor")
