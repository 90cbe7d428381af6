"""Seeded noise and the Euler-Maruyama substep with compound-Poisson jumps.

Random streams
--------------
Every path owns one :class:`RngStream`: numpy's PCG64 bit generator seeded
by ``SeedSequence(root_seed, spawn_key=(path_index,))``. Gaussian draws use
numpy's ziggurat sampler. Per step a path consumes, in order, one standard
normal, then (only when the Levy measure has positive mass) one Poisson
count and that many uniforms for the marks. The same draws are shared by
every cell, so the number of draws never depends on the grid size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, SamplerUnavailable
from .grid import ScalarField
from .models import ProblemSpec
from .special import adaptive_simpson

RNG_ALGORITHM = "numpy.PCG64/SeedSequence(root_seed,spawn_key=(path,))/ziggurat-normal"
QUANTILE_NODES = 2 ** 14


class RngStream:
    """Deterministic per-path random stream with a draw counter."""

    algorithm = RNG_ALGORITHM

    def __init__(self, seed: int, index: int = 0):
        self.seed = int(seed)
        self.index = int(index)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.index,))
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self.draws = 0

    def __repr__(self):
        return f"RngStream(seed={self.seed}, index={self.index}, draws={self.draws})"

    def normal(self) -> float:
        self.draws += 1
        return float(self._gen.standard_normal())

    def poisson(self, lam: float) -> int:
        self.draws += 1
        return int(self._gen.poisson(lam))

    def uniforms(self, k: int) -> np.ndarray:
        self.draws += k
        return self._gen.random(k)


@dataclass(frozen=True, eq=False)
class LevyMeasure:
    """Finite Levy measure ``m`` of total mass ``alpha``.

    Marks (law ``m/alpha``) come from ``quantile`` or from ``quantile_table``,
    values of the quantile function on ``linspace(0, 1, n)``. The compensator
    ``int eta(u, z) m(dz)`` uses ``compensator(u)`` when given, otherwise
    adaptive quadrature of ``eta(u, z) density(z)`` over ``support``, or a
    finite sum over ``atoms`` for purely atomic measures.
    """

    alpha: float
    quantile: Optional[Callable] = None
    quantile_table: Optional[np.ndarray] = None
    compensator: Optional[Callable] = None
    density: Optional[Callable] = None
    support: Optional[tuple] = None
    atoms: Optional[tuple] = None  # ((z, mass), ...)
    tol: float = 1e-10

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if self.quantile_table is not None:
            t = np.asarray(self.quantile_table, dtype=float)
            if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
                raise DomainError("quantile table must be strictly increasing")
            t.flags.writeable = False
            object.__setattr__(self, "quantile_table", t)

    @property
    def has_sampler(self) -> bool:
        return self.quantile is not None or self.quantile_table is not None

    def quantile_values(self, p):
        if self.quantile is not None:
            return np.asarray(self.quantile(np.asarray(p, dtype=float)), dtype=float)
        if self.quantile_table is not None:
            t = self.quantile_table
            return np.interp(p, np.linspace(0.0, 1.0, len(t)), t)
        raise SamplerUnavailable("Levy measure has no mark sampler")

    # constructors -----------------------------------------------------

    @classmethod
    def none(cls) -> "LevyMeasure":
        return cls(0.0)

    @classmethod
    def point_mass(cls, z: float, alpha: float) -> "LevyMeasure":
        z = float(z)
        return cls(float(alpha), quantile=lambda p: np.full(np.shape(p), z), atoms=((z, float(alpha)),))

    @classmethod
    def uniform(cls, low: float, high: float, alpha: float) -> "LevyMeasure":
        """Constant density ``alpha / (high - low)`` on ``(low, high)``."""
        low, high, alpha = float(low), float(high), float(alpha)
        if not high > low:
            raise DomainError("uniform Levy measure needs high > low")
        dens = alpha / (high - low)
        return cls(alpha, quantile=lambda p: low + (high - low) * np.asarray(p),
                   density=lambda z: dens * np.ones_like(np.asarray(z, dtype=float)), support=(low, high))

    @classmethod
    def from_density(cls, density: Callable, support: tuple, nodes: int = QUANTILE_NODES,
                     compensator: Optional[Callable] = None, grid=None) -> "LevyMeasure":
        """Tabulate the quantile function by numerically inverting the CDF.

        ``alpha`` is the trapezoid integral of ``density`` over ``support``
        (or over the increasing abscissae ``grid`` when supplied).
        """
        a, b = map(float, support)
        z = np.linspace(a, b, 16 * nodes + 1) if grid is None else np.asarray(grid, dtype=float)
        rho = np.asarray(density(z), dtype=float)
        if np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise DomainError("density must be finite and non-negative on the support")
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(z))])
        alpha = float(cdf[-1])
        if alpha <= 0:
            raise DomainError("density has zero mass on the support")
        cdf /= alpha
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        table = np.interp(np.linspace(0.0, 1.0, nodes), cdf[keep], z[keep])
        return cls(alpha, quantile_table=table, compensator=compensator, density=density, support=(a, b))

    @classmethod
    def lognormal(cls, mu: float = 0.0, s: float = 1.0, alpha: float = 1.0, upper: float = None,
                  nodes: int = QUANTILE_NODES) -> "LevyMeasure":
        """``alpha`` times the lognormal(mu, s) density, truncated far in the tail."""
        if upper is None:
            upper = float(np.exp(mu + 12.0 * s))

        def dens(z):
            z = np.asarray(z, dtype=float)
            out = np.zeros_like(z)
            pos = z > 0
            zp = z[pos]
            out[pos] = np.exp(-(np.log(zp) - mu) ** 2 / (2 * s * s)) / (zp * s * np.sqrt(2 * np.pi))
            return out

        lower = float(np.exp(mu - 12.0 * s))
        grid = np.exp(np.linspace(np.log(lower), np.log(upper), 16 * nodes + 1))
        base = cls.from_density(dens, (0.0, upper), nodes, grid=grid)
        scaled = (lambda z: alpha / base.alpha * dens(z))
        return cls(float(alpha), quantile_table=base.quantile_table, density=scaled, support=(0.0, upper))


def sample_brownian_increment(rng: RngStream, dt: float) -> float:
    if not dt > 0:
        raise DomainError("dt must be positive")
    return float(np.sqrt(dt)) * rng.normal()


def sample_jump_count(rng: RngStream, alpha: float, dt: float) -> int:
    if alpha < 0 or not dt > 0:
        raise DomainError("need alpha >= 0 and dt > 0")
    if alpha == 0:
        return 0
    return rng.poisson(alpha * dt)


def sample_marks(rng: RngStream, levy: LevyMeasure, k: int) -> np.ndarray:
    if levy.alpha > 0 and not levy.has_sampler:
        raise SamplerUnavailable("alpha > 0 but the Levy measure has no mark sampler")
    if k == 0:
        return np.empty(0)
    return np.atleast_1d(levy.quantile_values(rng.uniforms(k)))


def sample_mark(rng: RngStream, levy: LevyMeasure) -> float:
    """One draw from ``m(dz) / alpha`` by inverse transform."""
    return float(sample_marks(rng, levy, 1)[0])


def compensator_value(levy: Optional[LevyMeasure], eta: Optional[Callable], u):
    """``int eta(u, z) m(dz)``, elementwise in ``u``."""
    u_arr = np.asarray(u, dtype=float)
    if levy is None or eta is None or levy.alpha == 0:
        return np.zeros_like(u_arr) if u_arr.ndim else 0.0
    if levy.compensator is not None:
        out = np.asarray(levy.compensator(u_arr), dtype=float)
    elif levy.atoms is not None:
        out = np.zeros_like(u_arr)
        for z, mass in levy.atoms:
            out = out + mass * np.asarray(eta(u_arr, z), dtype=float)
    elif levy.density is not None and levy.support is not None:
        a, b = levy.support
        out = adaptive_simpson(lambda z: np.asarray(eta(u_arr, z), dtype=float) * float(levy.density(np.array(z))),
                               a, b, tol=levy.tol)
    else:
        raise SamplerUnavailable("Levy measure has neither a compensator nor a density")
    return out if u_arr.ndim else float(out)


@dataclass(frozen=True)
class StepNoise:
    """Noise shared by all cells over one step."""

    dW: float
    marks: np.ndarray


def draw_step_noise(rng: RngStream, spec: ProblemSpec, dt: float) -> StepNoise:
    dW = sample_brownian_increment(rng, dt)
    if spec.levy is not None and spec.levy.alpha > 0:
        n = sample_jump_count(rng, spec.levy.alpha, dt)
        marks = sample_marks(rng, spec.levy, n)
    else:
        marks = np.empty(0)
    return StepNoise(dW, marks)


def em_update(u: np.ndarray, spec: ProblemSpec, dt: float, noise: StepNoise, clip: bool = False) -> np.ndarray:
    """Array form of :func:`step_em` with pre-drawn noise.

    Every jump is evaluated at the pre-step state.
    """
    out = u
    if spec.sigma is not None:
        out = out + np.asarray(spec.sigma(u), dtype=float) * noise.dW
    if spec.has_jumps:
        out = out - dt * compensator_value(spec.levy, spec.eta, u)
        for z in noise.marks:
            out = out + np.asarray(spec.eta(u, float(z)), dtype=float)
    if clip:
        b = spec.invariant_bound
        out = np.where(np.abs(u) <= b, np.clip(out, -b, b), out)
    return out


def step_em(field: ScalarField, spec: ProblemSpec, dt: float, rng: RngStream, clip: bool = False) -> ScalarField:
    """One Euler-Maruyama step; all cells see the same increment and marks."""
    noise = draw_step_noise(rng, spec, dt)
    return field.with_values(em_update(field.values, spec, dt, noise, clip))
