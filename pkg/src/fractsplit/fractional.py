"""Discrete fractional Laplacian on a truncated symmetric domain.

The weights integrate the singular kernel ``a_theta |z|^(-1-2 theta)`` over
each cell; everything beyond the domain is folded into two tail terms
acting on constant extensions of the edge values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, GridMismatch
from .grid import Grid1D, ScalarField
from .special import gamma_function


def _check_theta(theta):
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta!r}")


def compute_a_theta(theta: float) -> float:
    """Normalisation ``2^(2t-1) Gamma((1+2t)/2) / (sqrt(pi) Gamma(1-t))``."""
    _check_theta(theta)
    return (2.0 ** (2.0 * theta - 1.0) * gamma_function(0.5 + theta)
            / (math.sqrt(math.pi) * gamma_function(1.0 - theta)))


def _half_index_differences(i: np.ndarray, theta: float) -> np.ndarray:
    """``(i - 1/2)^(-2t) - (i + 1/2)^(-2t)`` without cancellation for large i."""
    hi = i + 0.5
    return hi ** (-2.0 * theta) * np.expm1(-2.0 * theta * np.log1p(-1.0 / hi))


@dataclass(frozen=True, eq=False)
class FractionalStencil:
    theta: float
    dx: float
    num_cells: int
    a_theta: float
    weights: np.ndarray  # weights[k] = G_{k+1}, k = 0 .. J-2

    @property
    def tail_coefficient(self) -> float:
        return self.a_theta / (2.0 * self.theta * self.dx ** (2.0 * self.theta))

    @property
    def total_mass(self) -> float:
        """``a_theta * int_{|z| > dx/2} |z|^(-1-2t) dz``: all weights plus both tails."""
        return self.a_theta * 2.0 ** (1.0 + 2.0 * self.theta) / (2.0 * self.theta) * self.dx ** (-2.0 * self.theta)

    def weight(self, i: int) -> float:
        i = abs(int(i))
        if i == 0:
            raise ValueError("G_0 is not defined")
        if i <= len(self.weights):
            return float(self.weights[i - 1])
        return float(self.tail_coefficient * _half_index_differences(np.array([float(i)]), self.theta)[0])

    @cached_property
    def left_tail(self) -> np.ndarray:
        """Mass of all weights reaching past the left edge, per cell."""
        j = np.arange(self.num_cells, dtype=float)
        return self.tail_coefficient * (j + 0.5) ** (-2.0 * self.theta)

    @cached_property
    def right_tail(self) -> np.ndarray:
        return self.left_tail[::-1].copy()

    @cached_property
    def interaction_matrix(self) -> np.ndarray:
        """Symmetric Toeplitz matrix ``T[j, k] = G_{|j-k|}`` with zero diagonal."""
        J = self.num_cells
        col = np.concatenate([[0.0], self.weights])
        idx = np.abs(np.arange(J)[:, None] - np.arange(J)[None, :])
        return col[idx]

    @cached_property
    def inner_mass(self) -> np.ndarray:
        return self.interaction_matrix.sum(axis=1)


def compute_weights(theta: float, grid: Grid1D) -> FractionalStencil:
    _check_theta(theta)
    a = compute_a_theta(theta)
    i = np.arange(1, grid.num_cells, dtype=float)
    coef = a / (2.0 * theta * grid.dx ** (2.0 * theta))
    w = coef * _half_index_differences(i, theta)
    w.flags.writeable = False
    return FractionalStencil(float(theta), grid.dx, grid.num_cells, a, w)


def nonlocal_values(stencil: FractionalStencil, w: np.ndarray, left: float, right: float) -> np.ndarray:
    """Array form of :func:`apply_nonlocal`.

    Differences are taken against ``w[0]`` before the matrix product so a
    constant input gives an exact zero.
    """
    shifted = w - w[0]
    inner = stencil.interaction_matrix @ shifted - stencil.inner_mass * shifted
    return inner + stencil.left_tail * (left - w) + stencil.right_tail * (right - w)


def apply_nonlocal(stencil: FractionalStencil, w: ScalarField, boundary_left=None,
                   boundary_right=None) -> ScalarField:
    """``sum_{i != 0} G_i (w_{j+i} - w_j)`` with constant extension past both edges.

    The extension values default to the current edge cells.
    """
    if w.grid.num_cells != stencil.num_cells or not math.isclose(w.grid.dx, stencil.dx, rel_tol=1e-12):
        raise GridMismatch("field grid does not match the stencil")
    v = w.values
    left = v[0] if boundary_left is None else float(boundary_left)
    right = v[-1] if boundary_right is None else float(boundary_right)
    return w.with_values(nonlocal_values(stencil, v, left, right))
