"""Operator-splitting time loop and Monte-Carlo ensembles.

Each step applies the noise operator first (Euler-Maruyama) and then the
deterministic fractional conservation law over the same interval:
``u^{n+1} = S(dt) R(t_{n+1}, t_n) u^n``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from . import deterministic, stochastic
from .deterministic import SolverOptions, cfl_max_dt
from .diagnostics import ConvergenceReport, _fit, l1_distance, total_variation
from .fractional import FractionalStencil, compute_weights
from .grid import Grid1D, ScalarField, TimeGrid, make_time_grid, project_initial
from .models import ProblemSpec
from .stochastic import RngStream

DEFAULT_STRIDE = 10


def snapshot_indices(num_steps: int, stride: int) -> list:
    """``0, stride, 2 stride, ...`` plus the final step, without duplicates."""
    if stride < 1:
        raise ValueError("snapshot stride must be >= 1")
    idx = list(range(0, num_steps + 1, stride))
    if idx[-1] != num_steps:
        idx.append(num_steps)
    return idx


@dataclass(frozen=True)
class StepRecord:
    n: int  # index of the new level
    half: np.ndarray  # u^{n-1/2}, after the noise substep
    u: np.ndarray  # u^n


def iterate_path(spec: ProblemSpec, grid: Grid1D, times: TimeGrid, u0: ScalarField, rng: RngStream,
                 stencil: Optional[FractionalStencil] = None,
                 options: SolverOptions = SolverOptions()) -> Iterator[StepRecord]:
    """Yield ``(n, u^{n-1/2}, u^n)`` for ``n = 1 .. N``."""
    u0.check_grid(grid)
    if stencil is None:
        stencil = compute_weights(spec.theta, grid)
    dt = times.dt
    field_ = u0
    for n in range(1, times.num_steps + 1):
        half = stochastic.step_em(field_, spec, dt, rng, clip=options.clip_to_invariant_interval)
        field_ = deterministic.solve_deterministic(half, spec, stencil, dt, dt, options)
        yield StepRecord(n, half.values, field_.values)


@dataclass
class PathTrajectory:
    snapshots: dict  # step index -> ScalarField
    times: TimeGrid
    seed: int
    path_index: int
    halves: Optional[dict] = None

    @property
    def final(self) -> ScalarField:
        return self.snapshots[self.times.num_steps]


def run_path(spec: ProblemSpec, grid: Grid1D, times: TimeGrid, u0: ScalarField, rng: RngStream,
             snapshot_stride: int = DEFAULT_STRIDE, stencil: Optional[FractionalStencil] = None,
             options: SolverOptions = SolverOptions(), keep_halves: bool = False) -> PathTrajectory:
    keep = set(snapshot_indices(times.num_steps, snapshot_stride))
    snaps = {0: u0}
    halves = {} if keep_halves else None
    for rec in iterate_path(spec, grid, times, u0, rng, stencil, options):
        if rec.n in keep:
            snaps[rec.n] = ScalarField(rec.u, grid)
            if keep_halves:
                halves[rec.n] = ScalarField(rec.half, grid)
    return PathTrajectory(snaps, times, rng.seed, rng.index, halves)


@dataclass
class EnsembleStats:
    """Per-snapshot Monte-Carlo summaries; per-path samples are kept for verdicts."""

    steps: np.ndarray
    times: np.ndarray
    n_paths: int
    root_seed: int
    linf_samples: np.ndarray  # (n_paths, n_snapshots)
    tv_samples: np.ndarray
    mean_final: ScalarField
    l1_ref_samples: Optional[np.ndarray] = None

    @property
    def mean_linf(self):
        return self.linf_samples.mean(axis=0)

    @property
    def max_linf(self):
        return self.linf_samples.max(axis=0)

    @property
    def mean_tv(self):
        return self.tv_samples.mean(axis=0)

    @property
    def stderr_tv(self):
        return _stderr(self.tv_samples)

    @property
    def stderr_linf(self):
        return _stderr(self.linf_samples)

    @property
    def mean_l1_ref(self):
        return None if self.l1_ref_samples is None else self.l1_ref_samples.mean(axis=0)


def _stderr(samples):
    n = samples.shape[0]
    if n < 2:
        return np.zeros(samples.shape[1])
    return samples.std(axis=0, ddof=1) / np.sqrt(n)


@dataclass
class _PathSummary:
    linf: np.ndarray
    tv: np.ndarray
    final: np.ndarray
    l1_ref: Optional[np.ndarray]


def _thread_count() -> int:
    env = os.environ.get("FRACTSPLIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _map_paths(fn: Callable[[int], object], order: Sequence[int]) -> dict:
    workers = min(_thread_count(), len(order))
    if workers <= 1:
        return {i: fn(i) for i in order}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return dict(zip(order, pool.map(fn, order)))


def run_ensemble(spec: ProblemSpec, grid: Grid1D, times: TimeGrid, u0: ScalarField, n_paths: int,
                 root_seed: int, snapshot_stride: int = DEFAULT_STRIDE, options: SolverOptions = SolverOptions(),
                 reference: Optional[ScalarField] = None, path_order: Optional[Sequence[int]] = None) -> EnsembleStats:
    """Run ``n_paths`` independent paths; path ``i`` uses ``RngStream(root_seed, i)``.

    Results are gathered by path index, so the statistics do not depend on
    ``path_order`` or on the number of worker threads.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    stencil = compute_weights(spec.theta, grid)
    keep = snapshot_indices(times.num_steps, snapshot_stride)
    keep_pos = {n: k for k, n in enumerate(keep)}

    def one(i):
        linf = np.empty(len(keep))
        tv = np.empty(len(keep))
        l1 = np.empty(len(keep)) if reference is not None else None

        def record(k, u):
            linf[k] = np.max(np.abs(u))
            tv[k] = total_variation(u)
            if l1 is not None:
                l1[k] = np.sum(np.abs(u - reference.values)) * grid.dx

        record(0, u0.values)
        last = u0.values
        for rec in iterate_path(spec, grid, times, u0, RngStream(root_seed, i), stencil, options):
            if rec.n in keep_pos:
                record(keep_pos[rec.n], rec.u)
            last = rec.u
        return _PathSummary(linf, tv, last, l1)

    order = list(range(n_paths)) if path_order is None else list(path_order)
    if sorted(order) != list(range(n_paths)):
        raise ValueError("path_order must be a permutation of range(n_paths)")
    results = _map_paths(one, order)
    summaries = [results[i] for i in range(n_paths)]
    linf = np.vstack([s.linf for s in summaries])
    tv = np.vstack([s.tv for s in summaries])
    final = np.vstack([s.final for s in summaries]).mean(axis=0)
    l1 = np.vstack([s.l1_ref for s in summaries]) if reference is not None else None
    steps = np.asarray(keep)
    return EnsembleStats(steps, steps * times.dt, n_paths, int(root_seed), linf, tv, ScalarField(final, grid), l1)


@dataclass
class TimeContinuityResult:
    dts: list
    estimates: list
    slope: float
    residual: float

    @property
    def points(self):
        return list(zip(self.dts, self.estimates))


def time_continuity_probe(spec: ProblemSpec, grid: Grid1D, u0: ScalarField, dt_list: Sequence[float],
                          n_paths: int, horizon: float = 1.0, root_seed: int = 0, window=None,
                          options: SolverOptions = SolverOptions()) -> TimeContinuityResult:
    """Estimate ``max_n E int_K |u^{n+1} - u^n| dx`` for each dt and fit its exponent.

    ``window`` is the compact set ``K`` as an interval; the whole truncated
    domain by default.
    """
    dts = [float(d) for d in dt_list]
    if len(dts) < 3 or any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("dt_list must hold at least three strictly decreasing entries")
    x = grid.cell_centers
    mask = np.ones(grid.num_cells, bool) if window is None else (x >= window[0]) & (x <= window[1])
    stencil = compute_weights(spec.theta, grid)
    estimates = []
    for dt in dts:
        times = make_time_grid(horizon, dt)

        def one(i):
            inc = np.empty(times.num_steps)
            prev = u0.values
            for rec in iterate_path(spec, grid, times, u0, RngStream(root_seed, i), stencil, options):
                inc[rec.n - 1] = np.sum(np.abs(rec.u - prev)[mask]) * grid.dx
                prev = rec.u
            return inc

        res = _map_paths(one, list(range(n_paths)))
        mean_inc = np.vstack([res[i] for i in range(n_paths)]).mean(axis=0)
        estimates.append(float(np.max(mean_inc)))
    slope, resid = _fit(zip(dts, estimates))
    return TimeContinuityResult(dts, estimates, slope, resid)


def convergence_study(spec: ProblemSpec, u0: Callable, half_width: float, dx0: float, levels: int,
                      horizon: float, dt: Optional[float] = None, n_paths: int = 1, root_seed: int = 0,
                      options: SolverOptions = SolverOptions()) -> ConvergenceReport:
    """Self-convergence in L1 against a reference one refinement below the finest level.

    ``levels`` grids ``dx0, dx0/2, ...`` are compared with a reference at
    ``dx0 / 2^levels``. With ``dt=None`` each level uses the largest
    CFL-admissible step that divides ``horizon`` and the noise is switched
    off; with a fixed ``dt`` all levels share the splitting step and hence
    the same noise realisation per path, and errors are averaged over paths.
    """
    if levels < 3:
        raise ValueError("need at least three levels")
    if dt is None:
        spec = spec.without_noise()
        n_paths = 1
    grids = [Grid1D(half_width, dx0 / 2 ** k, int(round(2 * half_width / dx0)) * 2 ** k) for k in range(levels + 1)]
    finals, dts = [], []
    for g in grids:
        field0 = project_initial(u0, g)
        if dt is None:
            bound = cfl_max_dt(g, spec, compute_weights(spec.theta, g), options.cfl_safety,
                               state_bound=float(np.max(np.abs(field0.values))))
            level_dt = horizon / int(np.ceil(horizon / bound * (1 - 1e-12)))
        else:
            level_dt = dt
        times = make_time_grid(horizon, level_dt)
        stencil = compute_weights(spec.theta, g)
        path_finals = []
        for i in range(n_paths):
            traj = run_path(spec, g, times, field0, RngStream(root_seed, i), times.num_steps, stencil, options)
            path_finals.append(traj.final)
        finals.append(path_finals)
        dts.append(times.dt)
    ref = finals[-1]
    errors = []
    for k in range(levels):
        errs = [l1_distance(finals[k][i], ref[i]) for i in range(n_paths)]
        errors.append(float(np.mean(errs)))
    return ConvergenceReport.from_levels([g.dx for g in grids[:-1]], dts[:-1], errors, grids[-1].dx)
