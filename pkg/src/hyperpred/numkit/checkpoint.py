"""JSON parameter checkpoints.

Layout::

    {"format": "hyperpred-params", "version": 1,
     "params": {name: {"shape": [...], "values": [row-major floats]}}}

Floats are written with ``repr`` precision, so a save/load round trip is
bit-exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tensor import Tensor

FORMAT = "hyperpred-params"
VERSION = 1


def params_to_dict(params: dict[str, Tensor]) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "params": {
            name: {"shape": list(t.values.shape), "values": t.values.ravel().tolist()}
            for name, t in params.items()
        },
    }


def params_from_dict(doc: dict) -> dict[str, Tensor]:
    if doc.get("format") != FORMAT:
        raise ValueError(f"not a parameter checkpoint (format={doc.get('format')!r})")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    out = {}
    for name, entry in doc["params"].items():
        values = np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
        out[name] = Tensor(values, requires_grad=True, name=name)
    return out


def save_params(params: dict[str, Tensor], path) -> None:
    Path(path).write_text(json.dumps(params_to_dict(params)), encoding="utf-8")


def load_params(path) -> dict[str, Tensor]:
    return params_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
