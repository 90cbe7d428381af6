"""Command-line entry point: ``fractsplit simulate|convergence|preset|check-bounds``.

Exit codes: 0 success, 1 verdict failure, 2 configuration or I/O error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io, presets
from .config import RunConfig, build_problem, config_from_dict, load_config
from .deterministic import SolverOptions, dx_from_cfl
from .diagnostics import BoundVerdicts, bound_verdicts
from .errors import ConfigError, IoError, NumericalFailure
from .grid import Grid1D, TimeGrid, make_grid, make_time_grid, project_initial
from .splitting import EnsembleStats, convergence_study, run_ensemble

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass
class ResolvedRun:
    config: RunConfig
    spec: object
    u0: object
    grid: Grid1D
    times: TimeGrid
    options: SolverOptions


def resolve(cfg: RunConfig) -> ResolvedRun:
    """Turn a validated config into grids, model and solver options."""
    spec, u0 = build_problem(cfg)
    if cfg.from_cfl:
        dx = dx_from_cfl(cfg.dt, spec, cfg.half_width, cfg.cfl_safety, state_bound=spec.invariant_bound)
    else:
        dx = cfg.dx
    grid = make_grid(cfg.half_width, dx)
    times = make_time_grid(cfg.horizon, cfg.dt)
    options = SolverOptions(cfl_safety=cfg.cfl_safety,
                            allow_subcycling=cfg.flags["allow_subcycling"],
                            clip_to_invariant_interval=cfg.flags["clip_to_invariant_interval"])
    return ResolvedRun(cfg, spec, u0, grid, times, options)


@dataclass
class SimulationResult:
    run: ResolvedRun
    stats: EnsembleStats
    verdicts: BoundVerdicts
    files: list


def _run_meta(run: ResolvedRun) -> dict:
    return {"dx": run.grid.dx, "num_cells": run.grid.num_cells, "dt": run.times.dt,
            "num_steps": run.times.num_steps, "theta": run.config.theta, "n_paths": run.config.n_paths,
            "cfl_safety": run.config.cfl_safety, "dx_mode": "from_cfl" if run.config.from_cfl else "given"}


def simulate(cfg: RunConfig, out_dir=None, emit: bool = True) -> SimulationResult:
    """Run the configured ensemble and (optionally) write CSVs plus sidecars."""
    run = resolve(cfg)
    field0 = project_initial(run.u0, run.grid)
    stats = run_ensemble(run.spec, run.grid, run.times, field0, cfg.n_paths, cfg.root_seed,
                         cfg.snapshot_stride, run.options)
    tol = cfg.tolerances
    verdicts = bound_verdicts(stats, field0, run.spec, tol["linf"], tol["tv"], tol["linf_fraction"])
    files = []
    if emit:
        out = Path(cfg.output_dir if out_dir is None else out_dir)
        h, meta = cfg.config_hash(), _run_meta(run)
        files.append(io.emit_field_csv(field0, run.grid, out / "initial.csv", h, cfg.root_seed, meta))
        files.append(io.emit_field_csv(stats.mean_final, run.grid, out / "final.csv", h, cfg.root_seed, meta))
        files.append(io.emit_stats_csv(stats, out / "stats.csv", h, cfg.root_seed, meta))
        files.append(io.emit_gnuplot_script(out))
    return SimulationResult(run, stats, verdicts, files)


def convergence(cfg: RunConfig, levels: int, out_dir=None, emit: bool = True):
    """Self-convergence over ``levels`` grids (dx halved ``levels - 1`` times).

    In ``from_cfl`` mode the noise is switched off and each level takes its
    own CFL-limited step; otherwise all levels share ``time.dt`` and the
    errors are averaged over ``n_paths`` common noise paths.
    """
    run = resolve(cfg)
    dt = None if cfg.from_cfl else cfg.dt
    n_paths = 1 if cfg.from_cfl else cfg.n_paths
    report = convergence_study(run.spec, run.u0, cfg.half_width, run.grid.dx, levels, cfg.horizon, dt,
                               n_paths, cfg.root_seed, run.options)
    if emit:
        out = Path(cfg.output_dir if out_dir is None else out_dir)
        meta = {"fitted_order": report.fitted_order, "residual": report.residual,
                "reference_dx": report.reference_dx, "noise": "off" if dt is None else "on"}
        io.emit_convergence_csv(report, out / "convergence.csv", cfg.config_hash(), cfg.root_seed, meta)
    return report


def preset_config(name: str, theta: float, n_paths: int = 256, root_seed: int = 0) -> RunConfig:
    """Configuration for one of the two reference replays at ``theta``."""
    if name not in presets.PRESETS:
        raise ConfigError(f"unknown preset {name!r}", "name")
    return config_from_dict({
        "scenario": name,
        "theta": theta,
        "grid": {"half_width": 1.0, "from_cfl": True},
        "time": {"T": 1.0, "dt": presets.replay_dt(theta)},
        "n_paths": n_paths,
        "root_seed": root_seed,
        "output_dir": f"out/{name}_theta{theta:g}",
    })


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fractsplit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a Monte-Carlo ensemble and write CSVs")
    s.add_argument("--config", required=True)
    s.add_argument("--paths", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")

    c = sub.add_parser("convergence", help="grid self-convergence study")
    c.add_argument("--config", required=True)
    c.add_argument("--levels", type=int, required=True)
    c.add_argument("--out")

    r = sub.add_parser("preset", help="write a configuration for a reference replay")
    r.add_argument("--name", required=True, choices=sorted(presets.PRESETS))
    r.add_argument("--theta", type=float, required=True)
    r.add_argument("--emit-config", required=True, dest="emit_config")
    r.add_argument("--paths", type=int, default=256)
    r.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("check-bounds", help="run the ensemble and report the bound verdicts")
    b.add_argument("--config", required=True)
    b.add_argument("--paths", type=int)
    b.add_argument("--seed", type=int)
    return p


def _load_with_overrides(args) -> RunConfig:
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "config") from exc
    overrides = {}
    if getattr(args, "paths", None) is not None:
        overrides["n_paths"] = args.paths
    if getattr(args, "seed", None) is not None:
        overrides["root_seed"] = args.seed
    if overrides:
        doc = cfg.to_dict()
        doc.update(overrides)
        cfg = config_from_dict(doc)
    return cfg


def _dispatch(args) -> int:
    if args.command == "preset":
        cfg = preset_config(args.name, args.theta, args.paths, args.seed)
        try:
            Path(args.emit_config).parent.mkdir(parents=True, exist_ok=True)
            Path(args.emit_config).write_text(cfg.to_json(), encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write {args.emit_config}: {exc}") from exc
        print(f"wrote {args.emit_config}")
        return EXIT_OK

    cfg = _load_with_overrides(args)
    if args.command == "simulate":
        res = simulate(cfg, args.out)
        for f in res.files:
            print(f"wrote {f}")
        for line in res.verdicts.lines():
            print(line)
        return EXIT_OK
    if args.command == "convergence":
        report = convergence(cfg, args.levels, args.out)
        for dx, dt, err in report.levels:
            print(f"dx={dx:.6g} dt={dt:.6g} l1_error={err:.6e}")
        print(f"fitted_order={report.fitted_order:.4f} residual={report.residual:.3g}")
        return EXIT_OK
    # check-bounds
    res = simulate(cfg, emit=False)
    print(json.dumps({"grid_dx": res.run.grid.dx, "num_cells": res.run.grid.num_cells,
                      "n_paths": cfg.n_paths, "root_seed": cfg.root_seed}))
    for line in res.verdicts.lines():
        print(line)
    return EXIT_OK if res.verdicts.passed else EXIT_VERDICT


def main(argv: Optional[list] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
