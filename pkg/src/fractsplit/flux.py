"""Engquist-Osher numerical flux and its discrete divergence."""

from __future__ import annotations

import numpy as np

from .grid import ScalarField
from .models import FluxModel
from .special import adaptive_simpson

QUAD_TOL = 1e-10


def _split_integral(fprime, u: np.ndarray, positive: bool) -> np.ndarray:
    """``int_0^u max(f', 0)`` (or min) for every entry of ``u`` at once.

    Substituting ``s = u t`` maps all integrals to ``[0, 1]`` so one adaptive
    pass covers the whole array.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    clip = (lambda v: np.maximum(v, 0.0)) if positive else (lambda v: np.minimum(v, 0.0))
    scale = np.maximum(np.abs(u), 1.0)

    def integrand(t):
        return u * clip(np.asarray(fprime(u * t), dtype=float))

    return adaptive_simpson(integrand, 0.0, 1.0, tol=QUAD_TOL / float(np.max(scale)))


def flux_split(model: FluxModel, u):
    """Return ``(f_plus(u), f_minus(u))``, closed form when the model has one."""
    if model.split is not None:
        fp, fm = model.split
        return np.asarray(fp(u), dtype=float), np.asarray(fm(u), dtype=float)
    return _split_integral(model.f_prime, u, True), _split_integral(model.f_prime, u, False)


def eo_flux_values(model: FluxModel, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if model.split is not None:
        fp, fm = model.split
        return np.asarray(fp(u), dtype=float) + np.asarray(fm(v), dtype=float) + model.f0
    shape = np.broadcast(u, v).shape
    up = _split_integral(model.f_prime, np.broadcast_to(u, shape).ravel(), True)
    vm = _split_integral(model.f_prime, np.broadcast_to(v, shape).ravel(), False)
    return (up + vm + model.f0).reshape(shape)


def eo_flux(model: FluxModel, u: float, v: float) -> float:
    """``F(u, v) = int_0^u max(f', 0) + int_0^v min(f', 0) + f(0)``."""
    return float(eo_flux_values(model, float(u), float(v)))


def eo_divergence_values(model: FluxModel, u: np.ndarray, dx: float, left: float, right: float) -> np.ndarray:
    ext = np.concatenate([[left], u, [right]])
    if model.split is not None:
        fp, fm = model.split
        plus = np.asarray(fp(ext), dtype=float)
        minus = np.asarray(fm(ext), dtype=float)
    else:
        plus, minus = flux_split(model, ext)
    interface = plus[:-1] + minus[1:] + model.f0  # F(u_{j-1}, u_j), j = 0 .. J
    return (interface[1:] - interface[:-1]) / dx


def eo_divergence(model: FluxModel, field: ScalarField, boundary_left=None, boundary_right=None) -> ScalarField:
    """``[F(u_j, u_{j+1}) - F(u_{j-1}, u_j)] / dx`` with constant extension at both ends."""
    u = field.values
    left = u[0] if boundary_left is None else float(boundary_left)
    right = u[-1] if boundary_right is None else float(boundary_right)
    return field.with_values(eo_divergence_values(model, u, field.grid.dx, left, right))
