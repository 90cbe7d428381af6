"""Uniform space/time grids, cell-averaged fields and initial-data projection."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DegenerateGrid, DomainError, GridMismatch, NonCommensurate, NonFiniteInput

# 5-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree <= 9.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class Grid1D:
    """Uniform cells on the symmetric truncated domain ``[-half_width, half_width]``."""

    half_width: float
    dx: float
    num_cells: int

    def __post_init__(self):
        if not (self.dx > 0 and self.half_width > 0):
            raise DomainError("dx and half_width must be positive")
        if self.num_cells < 3:
            raise DegenerateGrid(f"need at least 3 cells, got {self.num_cells}")
        if abs(self.num_cells * self.dx - 2.0 * self.half_width) > 1e-12 * self.half_width:
            raise NonCommensurate(
                f"{self.num_cells} cells of width {self.dx!r} do not tile [-{self.half_width}, {self.half_width}]"
            )

    @cached_property
    def cell_centers(self) -> np.ndarray:
        x = -self.half_width + (np.arange(self.num_cells) + 0.5) * self.dx
        x.flags.writeable = False
        return x

    @property
    def edges(self) -> np.ndarray:
        return -self.half_width + np.arange(self.num_cells + 1) * self.dx

    def refined(self, factor: int = 2) -> "Grid1D":
        return make_grid(self.half_width, self.dx / factor)


def make_grid(half_width: float, dx: float) -> Grid1D:
    """Build the grid with ``round(2 K / dx)`` cells, rejecting non-commensurate widths."""
    if not (half_width > 0 and dx > 0):
        raise DomainError("half_width and dx must be positive")
    ratio = 2.0 * half_width / dx
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise NonCommensurate(f"2*{half_width}/{dx} = {ratio!r} is not an integer")
    if n < 3:
        raise DegenerateGrid(f"need at least 3 cells, got {n}")
    # Snap dx so that num_cells * dx reproduces the domain length exactly.
    return Grid1D(float(half_width), 2.0 * half_width / n, n)


def grid_from_cells(half_width: float, num_cells: int) -> Grid1D:
    return Grid1D(float(half_width), 2.0 * half_width / num_cells, int(num_cells))


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    dt: float
    num_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if abs(self.num_steps * self.dt - self.horizon) > 1e-12 * self.horizon:
            raise NonCommensurate(f"{self.num_steps} steps of {self.dt!r} do not reach T={self.horizon}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.num_steps + 1) * self.dt


def make_time_grid(horizon: float, dt: float) -> TimeGrid:
    if not (horizon > 0 and dt > 0):
        raise DomainError("horizon and dt must be positive")
    n = int(round(horizon / dt))
    if n < 1 or abs(n * dt - horizon) > 1e-9 * horizon:
        raise NonCommensurate(f"T={horizon} is not an integer multiple of dt={dt}")
    return TimeGrid(float(horizon), horizon / n, n)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Cell averages ``u_j`` bound to a grid. The value array is read-only."""

    values: np.ndarray
    grid: Grid1D = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.num_cells,):
            raise GridMismatch(f"expected {self.grid.num_cells} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput("field contains NaN or infinite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.grid.num_cells

    def with_values(self, values) -> "ScalarField":
        return ScalarField(values, self.grid)

    def check_grid(self, grid: Grid1D) -> None:
        if self.grid != grid:
            raise GridMismatch(f"field is bound to {self.grid}, expected {grid}")


def project_initial(u0: Callable[[np.ndarray], np.ndarray], grid: Grid1D) -> ScalarField:
    """Cell averages of ``u0`` by 5-node Gauss-Legendre quadrature in each cell.

    ``u0`` must accept a numpy array of abscissae.
    """
    half = 0.5 * grid.dx
    nodes = grid.cell_centers[:, None] + half * _GL_NODES[None, :]
    vals = np.asarray(u0(nodes), dtype=float)
    if vals.shape != nodes.shape:
        vals = np.broadcast_to(vals, nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteInput("initial function returned NaN/inf at a quadrature node")
    return ScalarField(0.5 * vals @ _GL_WEIGHTS, grid)
