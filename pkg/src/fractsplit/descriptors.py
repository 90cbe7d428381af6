"""Small declarative language for model functions inside run configurations.

A descriptor is either a built-in name or a mapping with a ``kind``:

* ``{"kind": "polynomial", "coeffs": [c0, c1, ...]}`` (ascending powers)
* ``{"kind": "clipped_polynomial", "coeffs": [...], "interval": [a, b]}``,
  zero outside the closed interval
* ``{"kind": "piecewise_affine", "x": [...], "y": [...]}``, linear between
  knots and constant beyond the ends; repeated abscissae encode jumps

No code is ever evaluated.
"""

from __future__ import annotations

import numpy as np

from . import presets
from .errors import SchemaError


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _identity(x):
    return np.asarray(x, dtype=float)


BUILTINS = {
    "zero": _zero,
    "identity": _identity,
    "example1_phi": presets.example_phi,
    "example1_sigma": presets.example_sigma,
    "example1_u0": presets.example1_u0,
    "example2_u0": presets.example2_u0,
}


class Polynomial:
    def __init__(self, coeffs, interval=None):
        self.poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        self.interval = None if interval is None else (float(interval[0]), float(interval[1]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = self.poly(x)
        if self.interval is not None:
            a, b = self.interval
            y = np.where((x >= a) & (x <= b), y, 0.0)
        return y


class PiecewiseAffine:
    def __init__(self, xs, ys):
        self.x = np.asarray(xs, dtype=float)
        self.y = np.asarray(ys, dtype=float)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self.y)


def _number_list(value, path, min_len=1):
    if not isinstance(value, list) or len(value) < min_len:
        raise SchemaError(f"expected a list of at least {min_len} numbers", path)
    for k, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError("expected a number", f"{path}[{k}]")
    return [float(v) for v in value]


def check_descriptor(desc, path: str) -> None:
    """Raise SchemaError unless ``desc`` is a well-formed descriptor."""
    if isinstance(desc, str):
        if desc not in BUILTINS:
            raise SchemaError(f"unknown built-in function {desc!r}", path)
        return
    if not isinstance(desc, dict):
        raise SchemaError("expected a built-in name or a descriptor object", path)
    kind = desc.get("kind")
    allowed = {
        "polynomial": {"kind", "coeffs"},
        "clipped_polynomial": {"kind", "coeffs", "interval"},
        "piecewise_affine": {"kind", "x", "y"},
    }
    if kind not in allowed:
        raise SchemaError(f"unknown descriptor kind {kind!r}", f"{path}.kind")
    for key in desc:
        if key not in allowed[kind]:
            raise SchemaError("unknown key", f"{path}.{key}")
    for key in allowed[kind] - {"kind"}:
        if key not in desc:
            raise SchemaError("missing required field", f"{path}.{key}")
    if kind in ("polynomial", "clipped_polynomial"):
        _number_list(desc["coeffs"], f"{path}.coeffs")
    if kind == "clipped_polynomial":
        iv = _number_list(desc["interval"], f"{path}.interval", 2)
        if len(iv) != 2 or iv[1] < iv[0]:
            raise SchemaError("interval must be [a, b] with a <= b", f"{path}.interval")
    if kind == "piecewise_affine":
        xs = _number_list(desc["x"], f"{path}.x", 2)
        ys = _number_list(desc["y"], f"{path}.y", 2)
        if len(xs) != len(ys):
            raise SchemaError("x and y must have equal length", path)
        if np.any(np.diff(xs) < 0):
            raise SchemaError("x must be non-decreasing", f"{path}.x")


def build_function(desc):
    if isinstance(desc, str):
        return BUILTINS[desc]
    kind = desc["kind"]
    if kind == "polynomial":
        return Polynomial(desc["coeffs"])
    if kind == "clipped_polynomial":
        return Polynomial(desc["coeffs"], desc["interval"])
    return PiecewiseAffine(desc["x"], desc["y"])
