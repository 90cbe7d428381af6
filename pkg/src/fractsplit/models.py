"""Model description: flux, diffusion nonlinearity, noise coefficients.

All model functions operate elementwise on numpy arrays. The jump
coefficient ``eta(u, z)`` takes an array ``u`` and a scalar mark ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from .errors import DomainError

if TYPE_CHECKING:
    from .stochastic import LevyMeasure

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FluxModel:
    """Flux ``f`` with derivative and an optional closed-form Engquist-Osher split.

    ``split`` is a pair ``(f_plus, f_minus)`` with
    ``f_plus(u) = int_0^u max(f', 0)`` and ``f_minus(u) = int_0^u min(f', 0)``.
    """

    f: ArrayFn
    f_prime: ArrayFn
    lipschitz_bound: Optional[float] = None
    split: Optional[tuple] = None
    name: str = "custom"

    @property
    def f0(self) -> float:
        return float(self.f(np.zeros(1))[0])

    def is_zero(self) -> bool:
        return self.name == "zero"


@dataclass(frozen=True)
class DiffusionModel:
    phi: ArrayFn
    lipschitz_bound: float = 1.0
    is_identity: bool = False
    name: str = "custom"

    def __call__(self, u):
        if self.is_identity:
            return u
        return self.phi(u)


def _identity(u):
    return np.asarray(u, dtype=float)


def _zeros(u, *args):
    return np.zeros_like(np.asarray(u, dtype=float))


IDENTITY_DIFFUSION = DiffusionModel(_identity, 1.0, True, "identity")
ZERO_DIFFUSION = DiffusionModel(_zeros, 0.0, False, "zero")


def _burgers_f(u):
    u = np.asarray(u, dtype=float)
    return 0.5 * u * u


def _burgers_fp(u):
    return np.asarray(u, dtype=float)


def _burgers_plus(u):
    p = np.maximum(u, 0.0)
    return 0.5 * p * p


def _burgers_minus(u):
    m = np.minimum(u, 0.0)
    return 0.5 * m * m


def burgers_flux(lipschitz_bound: float = 1.0) -> FluxModel:
    """``f(u) = u^2/2`` with the exact split ``(u+)^2/2``, ``(u-)^2/2``."""
    return FluxModel(_burgers_f, _burgers_fp, lipschitz_bound, (_burgers_plus, _burgers_minus), "burgers")


ZERO_FLUX = FluxModel(_zeros, _zeros, 0.0, (_zeros, _zeros), "zero")


class _PolynomialSplit:
    """Closed-form ``int_0^u max(p', 0)`` (or min) for a polynomial ``p``.

    The real roots of ``p'`` cut the line into pieces of constant sign; on
    each piece the integral is a difference of antiderivative values.
    """

    def __init__(self, poly: np.polynomial.Polynomial, positive: bool):
        self.poly = poly
        dp = poly.deriv()
        roots = dp.roots() if dp.degree() > 0 else np.array([])
        real = np.sort(np.real(roots[np.abs(np.imag(roots)) < 1e-12])) if len(roots) else np.array([])
        pts = np.unique(np.concatenate([real, [0.0]]))
        self.pts = pts
        # sign of p' on each piece: (-inf, pts[0]), (pts[0], pts[1]), ..., (pts[-1], inf)
        probes = np.concatenate([[pts[0] - 1.0], 0.5 * (pts[:-1] + pts[1:]), [pts[-1] + 1.0]])
        d = dp(probes)
        self.keep = (d > 0) if positive else (d < 0)
        # cumulative integral from 0 to each breakpoint
        i0 = int(np.searchsorted(pts, 0.0))
        acc = np.zeros(len(pts))
        for k in range(i0 + 1, len(pts)):
            acc[k] = acc[k - 1] + (poly(pts[k]) - poly(pts[k - 1])) * self.keep[k]
        for k in range(i0 - 1, -1, -1):
            acc[k] = acc[k + 1] - (poly(pts[k + 1]) - poly(pts[k])) * self.keep[k + 1]
        self.acc = acc

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        k = np.searchsorted(self.pts, u, side="right") - 1  # piece index: k+1 in keep
        base = np.clip(k, 0, len(self.pts) - 1)
        anchor = self.pts[base]
        out = self.acc[base] + (self.poly(u) - self.poly(anchor)) * self.keep[k + 1]
        return out


def polynomial_flux(coeffs, lipschitz_bound: Optional[float] = None) -> FluxModel:
    """Polynomial flux with ascending coefficients and an exact EO split."""
    poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    dpoly = poly.deriv()
    split = (_PolynomialSplit(poly, True), _PolynomialSplit(poly, False))
    return FluxModel(poly, dpoly, lipschitz_bound, split, f"polynomial{tuple(coeffs)}")


@dataclass(frozen=True)
class ProblemSpec:
    """Full model of the stochastic fractional (degenerate) conservation law.

    ``sigma=None`` means no Brownian forcing, ``eta=None`` or ``levy=None``
    means no jumps. ``support_bound`` is the M outside of which both noise
    coefficients vanish.
    """

    flux: FluxModel
    diffusion: DiffusionModel
    theta: float
    sigma: Optional[ArrayFn] = None
    sigma_lipschitz: float = 0.0
    support_bound: float = 1.0
    eta: Optional[Callable] = None
    eta_lipschitz: float = 0.0
    levy: Optional["LevyMeasure"] = None

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise DomainError(f"theta must lie in (0, 1), got {self.theta!r}")
        if self.support_bound <= 0:
            raise DomainError("support_bound must be positive")

    @property
    def has_jumps(self) -> bool:
        return self.eta is not None and self.levy is not None and self.levy.alpha > 0

    @property
    def invariant_bound(self) -> float:
        return 2.0 * self.support_bound

    def without_noise(self) -> "ProblemSpec":
        return ProblemSpec(self.flux, self.diffusion, self.theta, support_bound=self.support_bound)

    def with_theta(self, theta: float) -> "ProblemSpec":
        return ProblemSpec(self.flux, self.diffusion, theta, self.sigma, self.sigma_lipschitz,
                           self.support_bound, self.eta, self.eta_lipschitz, self.levy)
