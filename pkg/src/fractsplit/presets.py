"""The two Burgers test problems with degenerate diffusion and Brownian noise.

Both share ``f(u) = u^2/2``, ``phi(x) = (x - 1/2)^+`` on ``[0, 1]`` (zero
elsewhere) and ``sigma(x) = x (1 - x)`` on ``[-1, 1]`` (zero elsewhere);
they differ in the initial data. The cut-offs are kept exactly as stated,
including the jump of ``sigma`` at ``x = -1``.
"""

from __future__ import annotations

import numpy as np

from .models import DiffusionModel, ProblemSpec, burgers_flux

SUPPORT_BOUND = 1.0
PHI_LIPSCHITZ = 1.0
SIGMA_LIPSCHITZ = 3.0  # max |1 - 2x| on [-1, 1]
FLUX_LIPSCHITZ = 1.0


def example_phi(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0.0) & (x <= 1.0), np.maximum(x - 0.5, 0.0), 0.0)


def example_sigma(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, x * (1.0 - x), 0.0)


def example1_u0(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= -1.0) & (x < 0.0), -0.5, np.where((x >= 0.0) & (x <= 1.0), 0.5, 0.0))


def example2_u0(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    safe = np.where(inside, x, 0.0)
    return np.where(inside, 2.0 * np.exp(1.0 / (safe * safe - 1.0)), 0.0)


def _spec(theta: float) -> ProblemSpec:
    return ProblemSpec(
        flux=burgers_flux(FLUX_LIPSCHITZ),
        diffusion=DiffusionModel(example_phi, PHI_LIPSCHITZ, False, "example_phi"),
        theta=theta,
        sigma=example_sigma,
        sigma_lipschitz=SIGMA_LIPSCHITZ,
        support_bound=SUPPORT_BOUND,
    )


def preset_example_1(theta: float):
    """Riemann data: -1/2 on ``[-1, 0)``, +1/2 on ``[0, 1]``, zero elsewhere."""
    return _spec(theta), example1_u0


def preset_example_2(theta: float):
    """Smooth bump ``2 exp(1/(x^2 - 1))`` on ``(-1, 1)``."""
    return _spec(theta), example2_u0


PRESETS = {"example1": preset_example_1, "example2": preset_example_2}


def replay_dt(theta: float) -> float:
    """Splitting step for the reference replays: 0.002 below theta=1/2, else 0.001."""
    return 0.002 if theta < 0.5 else 0.001
