"""Explicit monotone substep for the fractional (degenerate) conservation law."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import CflViolation, DomainError
from .flux import eo_divergence_values
from .fractional import FractionalStencil, compute_a_theta, nonlocal_values
from .grid import Grid1D, ScalarField
from .models import FluxModel, ProblemSpec

DEFAULT_SAFETY = 0.9


@dataclass(frozen=True)
class SolverOptions:
    cfl_safety: float = DEFAULT_SAFETY
    allow_subcycling: bool = True
    clip_to_invariant_interval: bool = False


def estimate_flux_lipschitz(flux: FluxModel, state_bound: float, samples: int = 10_000) -> float:
    """``max |f'|`` over ``[-1.1 b, 1.1 b]``; used when no bound is declared."""
    b = 1.1 * max(float(state_bound), 1e-12)
    s = np.linspace(-b, b, samples)
    return float(np.max(np.abs(np.asarray(flux.f_prime(s), dtype=float))))


def _flux_lipschitz(spec: ProblemSpec, state_bound: Optional[float]) -> float:
    if spec.flux.lipschitz_bound is not None:
        return float(spec.flux.lipschitz_bound)
    if state_bound is None:
        raise DomainError("flux has no declared Lipschitz bound; pass state_bound")
    return estimate_flux_lipschitz(spec.flux, state_bound)


def _diffusion_lipschitz(spec: ProblemSpec) -> float:
    return 1.0 if spec.diffusion.is_identity else float(spec.diffusion.lipschitz_bound)


def cfl_rate(dx: float, theta: float, lip_f: float, lip_phi: float) -> float:
    """``2 L_f / dx + L_phi W(dx)``; a step is stable when ``dt * rate <= 1``."""
    w_total = compute_a_theta(theta) * 2.0 ** (1.0 + 2.0 * theta) / (2.0 * theta) * dx ** (-2.0 * theta)
    return 2.0 * lip_f / dx + lip_phi * w_total


def cfl_max_dt(grid: Grid1D, spec: ProblemSpec, stencil: Optional[FractionalStencil] = None,
               safety: float = DEFAULT_SAFETY, state_bound: Optional[float] = None) -> float:
    """Largest dt with ``dt (2 L_f/dx + L_phi W_total) <= safety``; ``inf`` when unconstrained."""
    if not 0.0 < safety <= 1.0:
        raise DomainError(f"safety must lie in (0, 1], got {safety!r}")
    lip_f = _flux_lipschitz(spec, state_bound)
    lip_phi = _diffusion_lipschitz(spec)
    if stencil is not None:
        w_total = stencil.total_mass
    else:
        w_total = cfl_rate(grid.dx, spec.theta, 0.0, 1.0)
    rate = 2.0 * lip_f / grid.dx + lip_phi * w_total
    if rate == 0.0:
        return math.inf
    return safety / rate


def dx_from_cfl(dt: float, spec: ProblemSpec, half_width: float, safety: float = DEFAULT_SAFETY,
                state_bound: Optional[float] = None) -> float:
    """Smallest commensurate dx on ``[-K, K]`` for which ``dt`` meets the CFL bound.

    Solves ``dt * rate(dx) = safety`` and rounds the cell count down so the
    returned width is never below the root.
    """
    lip_f = _flux_lipschitz(spec, state_bound)
    lip_phi = _diffusion_lipschitz(spec)
    if lip_f == 0.0 and lip_phi == 0.0:
        raise DomainError("no stability constraint: dx cannot be derived from the CFL condition")

    def g(dx):
        return dt * cfl_rate(dx, spec.theta, lip_f, lip_phi) - safety

    hi = 2.0 * half_width / 3.0
    if g(hi) > 0:
        raise DomainError(f"dt={dt} is too large for any grid with at least 3 cells")
    lo = hi
    while g(lo) <= 0:
        lo *= 0.5
    root = brentq(g, lo, hi, xtol=1e-15, rtol=1e-14)
    n = int(math.floor(2.0 * half_width / root * (1.0 + 1e-12)))
    while n > 3 and g(2.0 * half_width / n) > 0:
        n -= 1
    return 2.0 * half_width / n


def deterministic_update(u: np.ndarray, spec: ProblemSpec, stencil: FractionalStencil, dx: float,
                         dt: float) -> np.ndarray:
    """One explicit step on a bare array; edges extended by their current values."""
    out = u.copy()
    if not spec.flux.is_zero():
        out -= dt * eo_divergence_values(spec.flux, u, dx, u[0], u[-1])
    diff = spec.diffusion
    if diff.name != "zero":
        w = u if diff.is_identity else np.asarray(diff.phi(u), dtype=float)
        out += dt * nonlocal_values(stencil, w, w[0], w[-1])
    return out


def step_deterministic(field: ScalarField, spec: ProblemSpec, stencil: FractionalStencil, dt: float) -> ScalarField:
    """One monotone step; refuses steps beyond the CFL bound at safety 1."""
    bound = cfl_max_dt(field.grid, spec, stencil, safety=1.0, state_bound=float(np.max(np.abs(field.values))))
    if dt > bound * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt!r} exceeds the CFL bound {bound!r}")
    return field.with_values(deterministic_update(field.values, spec, stencil, field.grid.dx, dt))


def substep_plan(duration: float, dt: float, dt_max: float, allow_subcycling: bool = True):
    """Return ``(n_sub, dt_sub)`` covering ``duration`` with ``dt_sub <= min(dt, dt_max)``."""
    if duration == 0.0:
        return 0, 0.0
    h = min(dt, dt_max) if allow_subcycling else dt
    n = max(1, int(math.ceil(duration / h * (1.0 - 1e-12))))
    return n, duration / n


def solve_deterministic(field0: ScalarField, spec: ProblemSpec, stencil: FractionalStencil, duration: float,
                        dt: float, options: SolverOptions = SolverOptions()) -> ScalarField:
    """Advance over ``duration``, sub-cycling when ``dt`` exceeds the CFL bound."""
    if duration < 0:
        raise DomainError("duration must be non-negative")
    if duration == 0.0:
        return field0
    u = field0.values
    state = float(np.max(np.abs(u)))
    dt_max = cfl_max_dt(field0.grid, spec, stencil, options.cfl_safety, state_bound=state)
    n, h = substep_plan(duration, dt, dt_max, options.allow_subcycling)
    if not options.allow_subcycling:
        hard = cfl_max_dt(field0.grid, spec, stencil, 1.0, state_bound=state)
        if h > hard * (1.0 + 1e-12):
            raise CflViolation(f"dt={h!r} exceeds the CFL bound {hard!r} and sub-cycling is disabled")
    dx = field0.grid.dx
    for _ in range(n):
        u = deterministic_update(u, spec, stencil, dx, h)
    return field0.with_values(u)
