"""Probe-based checks of a ProblemSpec against the standing model assumptions.

Each check samples the model on a uniform probe set and records the worst
violation. Nothing here raises; callers decide what a failure means.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .models import ProblemSpec

TOL = 1e-9


@dataclass(frozen=True)
class AssumptionCheck:
    assumption: str
    passed: bool
    worst_violation: float
    location: Optional[float] = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, assumption: str) -> AssumptionCheck:
        for c in self.checks:
            if c.assumption == assumption:
                return c
        raise KeyError(assumption)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def as_rows(self):
        return [(c.assumption, c.passed, c.worst_violation) for c in self.checks]


class _Worst:
    """Accumulates several sub-checks of one assumption into one verdict."""

    def __init__(self, name):
        self.name = name
        self.value = 0.0
        self.where = None
        self.detail = ""

    def update(self, violations, where, detail):
        violations = np.atleast_1d(np.asarray(violations, dtype=float))
        if violations.size == 0:
            return
        k = int(np.argmax(violations))
        if violations[k] > self.value:
            self.value = float(violations[k])
            self.where = float(np.atleast_1d(where)[k])
            self.detail = detail

    def result(self):
        return AssumptionCheck(self.name, self.value <= TOL, self.value, self.where, self.detail)


def _lipschitz_excess(fn: Callable, u: np.ndarray, bound: float):
    vals = np.asarray(fn(u), dtype=float)
    du = np.diff(u)
    return np.abs(np.diff(vals)) - bound * du, u[:-1]


def _default_marks(spec: ProblemSpec) -> np.ndarray:
    marks = [-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0]
    levy = spec.levy
    if levy is not None and levy.alpha > 0 and levy.has_sampler:
        marks.extend(np.atleast_1d(levy.quantile_values((np.arange(9) + 0.5) / 9.0)).tolist())
    return np.unique(np.asarray(marks, dtype=float))


def validate_spec(spec: ProblemSpec, state_range=None, probes: int = 401,
                  initial: Optional[Callable] = None, marks=None) -> ValidationReport:
    """Check A1-A8 (and the flux split identities) on ``probes`` uniform states.

    ``state_range`` defaults to ``[-2M, 2M]``. A1 is only checked when an
    ``initial`` function is supplied.
    """
    if probes < 2:
        raise ValueError("probes must be >= 2")
    if state_range is None:
        state_range = (-spec.invariant_bound, spec.invariant_bound)
    lo, hi = map(float, state_range)
    u = np.linspace(lo, hi, int(probes))
    zero = np.zeros(1)
    M = spec.support_bound
    report = ValidationReport()

    if initial is not None:
        a1 = _Worst("A1")
        x = np.linspace(-10.0, 10.0, 4001)
        vals = np.asarray(initial(x), dtype=float)
        bad = ~np.isfinite(vals)
        a1.update(np.where(bad, np.inf, 0.0), x, "initial data not finite")
        report.checks.append(a1.result())

    a2 = _Worst("A2")
    diff = spec.diffusion
    phi_vals = np.asarray(diff(u), dtype=float)
    a2.update(np.maximum(-np.diff(phi_vals), 0.0), u[:-1], "phi decreasing")
    a2.update(np.abs(np.asarray(diff(zero), dtype=float)), zero, "phi(0) != 0")
    exc, where = _lipschitz_excess(diff, u, diff.lipschitz_bound)
    a2.update(exc, where, "phi Lipschitz bound exceeded")
    report.checks.append(a2.result())

    a3 = _Worst("A3")
    flux = spec.flux
    a3.update(abs(flux.f0), [0.0], "f(0) != 0")
    if flux.lipschitz_bound is not None:
        exc, where = _lipschitz_excess(flux.f, u, flux.lipschitz_bound)
        a3.update(exc, where, "flux Lipschitz bound exceeded")
    report.checks.append(a3.result())

    if flux.split is not None:
        eo = _Worst("EO-split")
        fp, fm = flux.split
        p, m = np.asarray(fp(u), dtype=float), np.asarray(fm(u), dtype=float)
        eo.update(np.maximum(-np.diff(p), 0.0), u[:-1], "f_plus decreasing")
        eo.update(np.maximum(np.diff(m), 0.0), u[:-1], "f_minus increasing")
        eo.update(np.abs(p + m + flux.f0 - np.asarray(flux.f(u), dtype=float)), u, "f_plus + f_minus + f(0) != f")
        report.checks.append(eo.result())

    a4 = _Worst("A4")
    a5 = _Worst("A5")
    if spec.sigma is not None:
        exc, where = _lipschitz_excess(spec.sigma, u, spec.sigma_lipschitz)
        a4.update(exc, where, "sigma Lipschitz bound exceeded")
        s = np.asarray(spec.sigma(u), dtype=float)
        a5.update(np.where(np.abs(u) > M, np.abs(s), 0.0), u, "sigma nonzero outside [-M, M]")
        a5.update(np.abs(np.asarray(spec.sigma(zero), dtype=float)), zero, "sigma(0) != 0")
    report.checks.append(a4.result())
    report.checks.append(a5.result())

    a6 = _Worst("A6")
    a7 = _Worst("A7")
    if spec.eta is not None:
        zs = _default_marks(spec) if marks is None else np.asarray(marks, dtype=float)
        for z in zs:
            e = np.asarray(spec.eta(u, float(z)), dtype=float)
            bound = spec.eta_lipschitz * min(abs(z), 1.0)
            a6.update(np.abs(np.diff(e)) - bound * np.diff(u), u[:-1], f"eta Lipschitz bound exceeded at z={z:g}")
            a7.update(np.abs(np.asarray(spec.eta(zero, float(z)), dtype=float)), zero, f"eta(0; {z:g}) != 0")
            a7.update(np.where(np.abs(u) > M, np.abs(e), 0.0), u, f"eta nonzero outside [-M, M] at z={z:g}")
        if not 0.0 <= spec.eta_lipschitz < 1.0:
            a6.update([np.inf], [0.0], "lambda* must lie in [0, 1)")
    report.checks.append(a6.result())
    report.checks.append(a7.result())

    a8 = _Worst("A8")
    if spec.levy is not None:
        alpha = spec.levy.alpha
        a8.update([0.0 if np.isfinite(alpha) and alpha >= 0 else np.inf], [0.0], "total mass not finite")
    report.checks.append(a8.result())
    return report
