"""Gamma function (Lanczos, g=7) and an adaptive Simpson integrator."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, QuadratureFailure

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_function(x: float) -> float:
    """Gamma function for ``x > 0``, relative error around 1e-15 on (0, 2]."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"gamma_function needs a finite x > 0, got {x!r}")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma_function(1.0 - x))
    z = x - 1.0
    s = _LANCZOS_COEFFS[0]
    for k, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        s += c / (z + k)
    t = z + _LANCZOS_G + 0.5
    if x < 140.0:
        return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * s
    return math.exp(0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(s))


def adaptive_simpson(func, a: float, b: float, tol: float = 1e-10, max_depth: int = 40,
                     max_evals: int = 2_000_000):
    """Integrate ``func`` over ``[a, b]`` by adaptive Simpson.

    ``func`` maps a scalar abscissa to a scalar or to a fixed-shape array; for
    array integrands the error test uses the largest component. The absolute
    tolerance is split between sub-intervals in proportion to their width.
    """
    a = float(a)
    b = float(b)
    if a == b:
        return np.zeros_like(np.asarray(func(a), dtype=float)) + 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    def f(x):
        return np.asarray(func(x), dtype=float)

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    evals = 3
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = np.zeros_like(whole)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = np.max(np.abs(left + right - s))
        if err <= 15.0 * eps:
            total = total + left + right + (left + right - s) / 15.0
            continue
        if depth >= max_depth or evals > max_evals:
            raise QuadratureFailure(
                f"adaptive Simpson did not reach tol={tol:g} on [{a}, {b}] "
                f"(depth {depth}, {evals} evaluations)"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return sign * total
