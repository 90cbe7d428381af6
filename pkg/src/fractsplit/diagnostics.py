"""Norms, restriction between grids, convergence fits and bound verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, IncompatibleRefinement
from .grid import Grid1D, ScalarField
from .models import ProblemSpec

# absolute slack for floating-point roundoff in bound comparisons
ROUNDOFF = 1e-12


def _values(field_or_array):
    return field_or_array.values if isinstance(field_or_array, ScalarField) else np.asarray(field_or_array, dtype=float)


def linf_norm(field) -> float:
    return float(np.max(np.abs(_values(field))))


def total_variation(field) -> float:
    """Sum of jumps across interior interfaces; the constant extension adds nothing."""
    return float(np.sum(np.abs(np.diff(_values(field)))))


def l1_norm(field, dx: float = None, window=None) -> float:
    if isinstance(field, ScalarField):
        dx = field.grid.dx if dx is None else dx
        if window is not None:
            x = field.grid.cell_centers
            mask = (x >= window[0]) & (x <= window[1])
            return float(np.sum(np.abs(field.values[mask])) * dx)
    return float(np.sum(np.abs(_values(field))) * dx)


def restrict(fine: ScalarField, coarse_grid: Grid1D) -> ScalarField:
    """Average each block of fine cells covered by one coarse cell."""
    g = fine.grid
    if not np.isclose(g.half_width, coarse_grid.half_width, rtol=1e-12, atol=0.0):
        raise IncompatibleRefinement("grids cover different domains")
    ratio = g.num_cells / coarse_grid.num_cells
    r = int(round(ratio))
    if r < 1 or g.num_cells != r * coarse_grid.num_cells:
        raise IncompatibleRefinement(f"fine grid ({g.num_cells} cells) does not refine {coarse_grid.num_cells} cells")
    if r == 1:
        return ScalarField(fine.values, coarse_grid)
    return ScalarField(fine.values.reshape(coarse_grid.num_cells, r).mean(axis=1), coarse_grid)


def l1_distance(a: ScalarField, b: ScalarField) -> float:
    """L1 distance on the coarser of the two grids after restriction."""
    if a.grid.num_cells > b.grid.num_cells:
        a, b = b, a
    b = restrict(b, a.grid)
    return float(np.sum(np.abs(a.values - b.values)) * a.grid.dx)


def observed_order(points) -> float:
    """Least-squares slope of ``log(error)`` against ``log(dx)``."""
    return _fit(points)[0]


def _fit(points):
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise DegenerateFit("need at least three (dx, error) points")
    h, e = pts[:, 0], pts[:, 1]
    if np.any(e <= 0) or np.any(h <= 0):
        raise DegenerateFit("errors and step sizes must be positive")
    x, y = np.log(h), np.log(e)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return float(slope), resid


@dataclass
class ConvergenceReport:
    dx: list
    dt: list
    l1_error: list
    fitted_order: float
    residual: float
    reference_dx: float = None

    @classmethod
    def from_levels(cls, dx, dt, errors, reference_dx=None):
        if len(dx) < 3:
            raise DegenerateFit("a convergence report needs at least three levels")
        if np.any(np.diff(dx) >= 0):
            raise DegenerateFit("dx must be strictly decreasing")
        order, resid = _fit(zip(dx, errors))
        return cls(list(map(float, dx)), list(map(float, dt)), list(map(float, errors)), order, resid,
                   reference_dx)

    @property
    def levels(self):
        return list(zip(self.dx, self.dt, self.l1_error))


@dataclass(frozen=True)
class BoundVerdict:
    name: str
    passed: bool
    bound: float
    observed: float
    slack: float
    detail: str = ""


@dataclass
class BoundVerdicts:
    linf: BoundVerdict
    bv: BoundVerdict
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.linf.passed and self.bv.passed

    def lines(self):
        out = []
        for v in (self.linf, self.bv):
            tag = "PASS" if v.passed else "FAIL"
            out.append(f"{tag} {v.name}: observed={v.observed:.6g} bound={v.bound:.6g} slack={v.slack:.6g} {v.detail}")
        return out


def bound_verdicts(stats, u0: ScalarField, spec: ProblemSpec, linf_tol: float = 0.02,
                   tv_tol: float = 0.05, max_violation_fraction: float = 0.01) -> BoundVerdicts:
    """Check the uniform bound and the expected-BV bound on ensemble statistics.

    Uniform bound: the fraction of (path, time) samples with
    ``||u||_inf > max(2M, ||u0||_inf) (1 + linf_tol)`` must not exceed
    ``max_violation_fraction``. BV bound: the mean total variation must stay
    below ``TV(u0) (1 + tv_tol)`` at every recorded time.
    """
    m_tilde = max(spec.invariant_bound, linf_norm(u0))
    limit = m_tilde * (1.0 + linf_tol) + ROUNDOFF
    samples = np.asarray(stats.linf_samples)
    frac = float(np.mean(samples > limit))
    worst = float(np.max(samples)) if samples.size else 0.0
    linf = BoundVerdict("uniform-bound", frac <= max_violation_fraction, m_tilde, worst, limit - worst,
                        f"violation_fraction={frac:.6g} (allowed {max_violation_fraction:g})")

    tv0 = total_variation(u0)
    tv_limit = tv0 * (1.0 + tv_tol) + ROUNDOFF
    mean_tv = np.asarray(stats.mean_tv)
    peak = float(np.max(mean_tv))
    bv = BoundVerdict("expected-bv-bound", bool(np.all(mean_tv <= tv_limit)), tv0, peak, tv_limit - peak,
                      f"max mean TV / TV(u0) = {peak / tv0 if tv0 > 0 else float('inf'):.6g}")
    return BoundVerdicts(linf, bv, {"violation_fraction": frac, "m_tilde": m_tilde})
