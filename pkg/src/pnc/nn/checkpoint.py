"""Parameter checkpoints: a versioned JSON container of named tensors.

Layout::

    {
      "format": "pnc-params",
      "version": 1,
      "tensors": [{"name": str, "shape": [int, ...], "data": [float, ...]}, ...]
    }

Values are written with Python's shortest round-tripping float repr, so a
save/load cycle reproduces float64 parameters bit for bit.
"""

import json

import numpy as np

from pnc.errors import ParseError

FORMAT_NAME = "pnc-params"
FORMAT_VERSION = 1


def save_params(path, params: dict[str, np.ndarray]) -> None:
    tensors = [
        {"name": name, "shape": list(value.shape), "data": value.reshape(-1).tolist()}
        for name, value in sorted(params.items())
    ]
    doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "tensors": tensors}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_params(path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise ParseError(f"not a {FORMAT_NAME} file: {path}")
    if doc.get("version") != FORMAT_VERSION:
        raise ParseError(f"unsupported checkpoint version {doc.get('version')!r}")
    out = {}
    for entry in doc["tensors"]:
        arr = np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
        out[entry["name"]] = arr
    return out


def assign_params(target: dict[str, np.ndarray], loaded: dict[str, np.ndarray]) -> None:
    """Copy loaded tensors into an existing named-parameter dict, shape-checked."""
    missing = sorted(set(target) - set(loaded))
    extra = sorted(set(loaded) - set(target))
    if missing or extra:
        raise ParseError(f"parameter names mismatch: missing={missing} extra={extra}")
    for name, value in target.items():
        if loaded[name].shape != value.shape:
            raise ParseError(
                f"shape mismatch for {name}: file {loaded[name].shape}, model {value.shape}")
        value[:] = loaded[name]
