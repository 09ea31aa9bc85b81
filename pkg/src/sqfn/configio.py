"""Structured JSON descriptions of kernels and weights.

A config file holds two lists::

    {
      "kernels": [{"name": "...", "type": "bump" | "derived" | "haar",
                   "dimension": 1}],
      "weights": [{"name": "...", "tag": "power" | "constant",
                   "exponent": 0.5, "dimension": 1}]
    }
"""
from __future__ import annotations

import json
from pathlib import Path

from . import kernels as K
from . import weights as W
from .errors import ConfigurationError


def kernel_from_entry(entry: dict) -> K.Kernel:
    ktype = entry.get("type")
    n = int(entry.get("dimension", 1))
    if ktype == "bump":
        return K.standard_bump(n).as_kernel()
    if ktype == "derived":
        return K.standard_family(n).psi
    if ktype == "haar":
        if n != 1:
            raise ConfigurationError("the haar kernel is 1-D")
        return K.ex38_psi()
    raise ConfigurationError(f"unknown kernel type {ktype!r}")


def weight_from_entry(entry: dict) -> W.WeightFn:
    tag = entry.get("tag")
    n = int(entry.get("dimension", 1))
    if tag == "power":
        return W.power_weight(float(entry["exponent"]), n)
    if tag == "constant":
        return W.constant_weight(n, float(entry.get("value", 1.0)))
    raise ConfigurationError(f"unknown weight tag {tag!r}")


def load_config(path: str | Path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    out = {"kernels": {}, "weights": {}}
    for entry in raw.get("kernels", []):
        out["kernels"][entry["name"]] = kernel_from_entry(entry)
    for entry in raw.get("weights", []):
        out["weights"][entry["name"]] = weight_from_entry(entry)
    return out
