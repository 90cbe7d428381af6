"""Run configuration documents (JSON) and their translation into solver objects.

Schema (all keys optional except ``scenario`` and ``theta``)::

    {
      "scenario": "example1" | "example2" | {inline model, see below},
      "theta": 0.3,
      "grid": {"half_width": 1.0, "dx": 0.01}  or  {"half_width": 1.0, "from_cfl": true},
      "time": {"T": 1.0, "dt": 0.002},
      "n_paths": 1, "root_seed": 0, "snapshot_stride": 10, "output_dir": "out",
      "cfl_safety": 0.9,
      "tolerances": {"linf": 0.02, "tv": 0.05, "linf_fraction": 0.01},
      "flags": {"clip_to_invariant_interval": false, "allow_subcycling": true}
    }

An inline model holds ``flux`` ("burgers" or a descriptor), ``diffusion``,
``sigma``, ``initial`` (descriptors), optional ``eta`` as ``{"u": desc,
"z": desc}`` meaning ``eta(u; z) = h(u) g(z)``, optional ``levy``
(``point_mass``, ``uniform`` or ``lognormal``) and the Lipschitz/support
constants. ``"dx": "from_cfl"`` is accepted as a synonym for
``"from_cfl": true``.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import presets
from .descriptors import build_function, check_descriptor
from .errors import ParseError, SchemaError
from .models import IDENTITY_DIFFUSION, ZERO_DIFFUSION, DiffusionModel, FluxModel, ProblemSpec, burgers_flux, polynomial_flux
from .special import adaptive_simpson
from .stochastic import LevyMeasure

DEFAULT_TOLERANCES = {"linf": 0.02, "tv": 0.05, "linf_fraction": 0.01}
DEFAULT_FLAGS = {"clip_to_invariant_interval": False, "allow_subcycling": True}

_INLINE_KEYS = {
    "flux", "flux_lipschitz", "diffusion", "diffusion_lipschitz", "sigma", "sigma_lipschitz",
    "support_bound", "initial", "eta", "eta_lipschitz", "levy",
}


@dataclass
class RunConfig:
    scenario: Any
    theta: float
    half_width: float = 1.0
    dx: Optional[float] = None
    from_cfl: bool = True
    horizon: float = 1.0
    dt: float = 0.002
    n_paths: int = 1
    root_seed: int = 0
    snapshot_stride: int = 10
    output_dir: str = "out"
    cfl_safety: float = 0.9
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    flags: dict = field(default_factory=lambda: dict(DEFAULT_FLAGS))

    def to_dict(self) -> dict:
        grid = {"half_width": self.half_width}
        if self.from_cfl:
            grid["from_cfl"] = True
        else:
            grid["dx"] = self.dx
        return {
            "scenario": copy.deepcopy(self.scenario),
            "theta": self.theta,
            "grid": grid,
            "time": {"T": self.horizon, "dt": self.dt},
            "n_paths": self.n_paths,
            "root_seed": self.root_seed,
            "snapshot_stride": self.snapshot_stride,
            "output_dir": self.output_dir,
            "cfl_safety": self.cfl_safety,
            "tolerances": dict(self.tolerances),
            "flags": dict(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _number(value, path, positive=False, integer=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", path)
    if integer and not (isinstance(value, int) or float(value).is_integer()):
        raise SchemaError("expected an integer", path)
    if not np.isfinite(value):
        raise SchemaError("expected a finite number", path)
    if positive and not value > 0:
        raise SchemaError("must be positive", path)
    if minimum is not None and value < minimum:
        raise SchemaError(f"must be >= {minimum}", path)
    return int(value) if integer else float(value)


def _bool(value, path):
    if not isinstance(value, bool):
        raise SchemaError("expected true or false", path)
    return value


def _object(value, path, allowed):
    if not isinstance(value, dict):
        raise SchemaError("expected an object", path)
    for key in value:
        if key not in allowed:
            raise SchemaError("unknown key", f"{path}.{key}" if path else key)
    return value


def _check_levy(levy, path):
    _object(levy, path, {"kind", "z", "alpha", "low", "high", "mu", "s"})
    kind = levy.get("kind")
    required = {"point_mass": {"z", "alpha"}, "uniform": {"low", "high", "alpha"}, "lognormal": {"mu", "s", "alpha"}}
    if kind not in required:
        raise SchemaError(f"unknown Levy measure kind {kind!r}", f"{path}.kind")
    extra = set(levy) - required[kind] - {"kind"}
    if extra:
        raise SchemaError("unknown key", f"{path}.{sorted(extra)[0]}")
    for key in required[kind]:
        if key not in levy:
            raise SchemaError("missing required field", f"{path}.{key}")
        _number(levy[key], f"{path}.{key}")
    if levy["alpha"] < 0:
        raise SchemaError("must be >= 0", f"{path}.alpha")
    if kind == "uniform" and not levy["high"] > levy["low"]:
        raise SchemaError("high must exceed low", path)
    if kind == "lognormal" and not levy["s"] > 0:
        raise SchemaError("must be positive", f"{path}.s")


def _check_scenario(sc, path="scenario"):
    if isinstance(sc, str):
        if sc not in presets.PRESETS:
            raise SchemaError(f"unknown preset {sc!r}", path)
        return
    _object(sc, path, _INLINE_KEYS)
    for key in ("flux", "initial"):
        if key not in sc:
            raise SchemaError("missing required field", f"{path}.{key}")
    if sc["flux"] != "burgers":
        check_descriptor(sc["flux"], f"{path}.flux")
    for key in ("diffusion", "sigma", "initial"):
        if sc.get(key) is not None:
            check_descriptor(sc[key], f"{path}.{key}")
    for key in ("flux_lipschitz", "diffusion_lipschitz", "sigma_lipschitz", "eta_lipschitz"):
        if key in sc:
            _number(sc[key], f"{path}.{key}", minimum=0.0)
    if "support_bound" in sc:
        _number(sc["support_bound"], f"{path}.support_bound", positive=True)
    if sc.get("eta") is not None:
        eta = _object(sc["eta"], f"{path}.eta", {"u", "z"})
        for key in ("u", "z"):
            if key not in eta:
                raise SchemaError("missing required field", f"{path}.eta.{key}")
            check_descriptor(eta[key], f"{path}.eta.{key}")
        if sc.get("eta_lipschitz", 0.0) >= 1.0:
            raise SchemaError("lambda* must be < 1", f"{path}.eta_lipschitz")
    if sc.get("levy") is not None:
        _check_levy(sc["levy"], f"{path}.levy")


def config_from_dict(doc: dict) -> RunConfig:
    top = {"scenario", "theta", "grid", "time", "n_paths", "root_seed", "snapshot_stride", "output_dir",
           "cfl_safety", "tolerances", "flags"}
    _object(doc, "", top)
    for key in ("scenario", "theta"):
        if key not in doc:
            raise SchemaError("missing required field", key)
    _check_scenario(doc["scenario"])
    theta = _number(doc["theta"], "theta")
    if not 0.0 < theta < 1.0:
        raise SchemaError("theta must lie in (0, 1)", "theta")
    cfg = RunConfig(copy.deepcopy(doc["scenario"]), theta)

    if "grid" in doc:
        grid = _object(doc["grid"], "grid", {"half_width", "dx", "from_cfl"})
        if "half_width" in grid:
            cfg.half_width = _number(grid["half_width"], "grid.half_width", positive=True)
        has_dx = "dx" in grid and grid["dx"] != "from_cfl"
        has_cfl = ("from_cfl" in grid and _bool(grid["from_cfl"], "grid.from_cfl")) or grid.get("dx") == "from_cfl"
        if "from_cfl" in grid and "dx" in grid:
            raise SchemaError("give exactly one of dx and from_cfl", "grid")
        if has_dx:
            cfg.dx = _number(grid["dx"], "grid.dx", positive=True)
            cfg.from_cfl = False
            ratio = 2.0 * cfg.half_width / cfg.dx
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 3:
                raise SchemaError("2*half_width/dx must be an integer >= 3", "grid.dx")
        elif has_cfl:
            cfg.from_cfl = True
        else:
            raise SchemaError("give exactly one of dx and from_cfl", "grid")
    if "time" in doc:
        t = _object(doc["time"], "time", {"T", "dt"})
        if "T" in t:
            cfg.horizon = _number(t["T"], "time.T", positive=True)
        if "dt" in t:
            cfg.dt = _number(t["dt"], "time.dt", positive=True)
        n = cfg.horizon / cfg.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise SchemaError("T must be an integer multiple of dt", "time.dt")
    if "n_paths" in doc:
        cfg.n_paths = _number(doc["n_paths"], "n_paths", integer=True, minimum=1)
    if "root_seed" in doc:
        cfg.root_seed = _number(doc["root_seed"], "root_seed", integer=True, minimum=0)
    if "snapshot_stride" in doc:
        cfg.snapshot_stride = _number(doc["snapshot_stride"], "snapshot_stride", integer=True, minimum=1)
    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str) or not doc["output_dir"]:
            raise SchemaError("expected a non-empty string", "output_dir")
        cfg.output_dir = doc["output_dir"]
    if "cfl_safety" in doc:
        cfg.cfl_safety = _number(doc["cfl_safety"], "cfl_safety", positive=True)
        if cfg.cfl_safety > 1.0:
            raise SchemaError("must lie in (0, 1]", "cfl_safety")
    if "tolerances" in doc:
        tol = _object(doc["tolerances"], "tolerances", set(DEFAULT_TOLERANCES))
        for key, value in tol.items():
            cfg.tolerances[key] = _number(value, f"tolerances.{key}", minimum=0.0)
    if "flags" in doc:
        flags = _object(doc["flags"], "flags", set(DEFAULT_FLAGS))
        for key, value in flags.items():
            cfg.flags[key] = _bool(value, f"flags.{key}")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    return config_from_dict(doc)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# translation into solver objects


def _inline_spec(sc: dict, theta: float):
    flux_desc = sc["flux"]
    flux_lip = sc.get("flux_lipschitz")
    if flux_desc == "burgers":
        flux = burgers_flux(1.0 if flux_lip is None else flux_lip)
    elif flux_desc == "zero":
        flux = FluxModel(build_function("zero"), build_function("zero"), 0.0,
                         (build_function("zero"), build_function("zero")), "zero")
    elif isinstance(flux_desc, dict) and flux_desc["kind"] == "polynomial":
        flux = polynomial_flux(flux_desc["coeffs"], flux_lip)
    else:
        f = build_function(flux_desc)
        h = 1e-6

        def fprime(u, f=f):
            u = np.asarray(u, dtype=float)
            return (f(u + h) - f(u - h)) / (2 * h)

        flux = FluxModel(f, fprime, flux_lip, None, "descriptor")

    diff_desc = sc.get("diffusion", "identity")
    if diff_desc == "identity":
        diffusion = IDENTITY_DIFFUSION
    elif diff_desc == "zero" or diff_desc is None:
        diffusion = ZERO_DIFFUSION
    else:
        diffusion = DiffusionModel(build_function(diff_desc), float(sc.get("diffusion_lipschitz", 1.0)))

    sigma = None if sc.get("sigma") in (None, "zero") else build_function(sc["sigma"])
    M = float(sc.get("support_bound", 1.0))
    eta = levy = None
    if sc.get("eta") is not None and sc.get("levy") is not None:
        h_u = build_function(sc["eta"]["u"])
        g_z = build_function(sc["eta"]["z"])

        def eta(u, z, h_u=h_u, g_z=g_z):
            return np.asarray(h_u(u), dtype=float) * float(g_z(np.array([z]))[0])

        levy = _levy_from_dict(sc["levy"], g_z, h_u)
    spec = ProblemSpec(flux, diffusion, theta, sigma, float(sc.get("sigma_lipschitz", 0.0)), M, eta,
                       float(sc.get("eta_lipschitz", 0.0)), levy)
    return spec, build_function(sc["initial"])


def _levy_from_dict(d: dict, g_z, h_u) -> LevyMeasure:
    kind, alpha = d["kind"], float(d["alpha"])
    if kind == "point_mass":
        base = LevyMeasure.point_mass(d["z"], alpha)
        moment = alpha * float(g_z(np.array([float(d["z"])]))[0])
    elif kind == "uniform":
        base = LevyMeasure.uniform(d["low"], d["high"], alpha)
        moment = float(adaptive_simpson(lambda z: g_z(np.array([z]))[0] * base.density(z), d["low"], d["high"]))
    else:
        base = LevyMeasure.lognormal(d["mu"], d["s"], alpha)
        t = base.quantile_table
        p = np.linspace(0.0, 1.0, len(t))
        gm = np.asarray(g_z(t), dtype=float)
        # E[g(Z)] over the tabulated law, trapezoid in probability space
        moment = alpha * float(np.sum(0.5 * (gm[1:] + gm[:-1]) * np.diff(p)))

    def compensator(u, h_u=h_u, moment=moment):
        return moment * np.asarray(h_u(u), dtype=float)

    return LevyMeasure(base.alpha, base.quantile, base.quantile_table, compensator, base.density, base.support,
                       base.atoms)


def build_problem(cfg: RunConfig):
    """Return ``(ProblemSpec, u0)`` for the configured scenario."""
    if isinstance(cfg.scenario, str):
        return presets.PRESETS[cfg.scenario](cfg.theta)
    return _inline_spec(cfg.scenario, cfg.theta)
