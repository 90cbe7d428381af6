import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractsplit.diagnostics import (ConvergenceReport, bound_verdicts, l1_distance, l1_norm, linf_norm,
                                    observed_order, restrict, total_variation)
from fractsplit.errors import DegenerateFit, IncompatibleRefinement
from fractsplit.grid import ScalarField, make_grid, make_time_grid, project_initial
from fractsplit.presets import example1_u0, preset_example_1
from fractsplit.splitting import run_ensemble
from fractsplit.models import ProblemSpec


def test_norms_basic():
    g = make_grid(1.0, 0.25)
    assert linf_norm(ScalarField(np.full(8, -0.3), g)) == pytest.approx(0.3)
    assert linf_norm(ScalarField(np.zeros(8), g)) == 0.0
    e1 = project_initial(example1_u0, g)
    assert linf_norm(e1) == 0.5
    assert total_variation(e1) == 1.0
    assert total_variation(np.linspace(2.0, -1.0, 17)) == pytest.approx(3.0, abs=1e-14)
    assert total_variation(np.full(5, 4.0)) == 0.0
    assert l1_norm(e1) == pytest.approx(1.0)
    assert l1_norm(e1, window=(0.0, 1.0)) == pytest.approx(0.5)


def test_restrict_examples():
    fine = make_grid(1.0, 0.25)
    f = ScalarField(np.arange(8.0), fine)
    assert np.array_equal(restrict(f, fine).values, f.values)
    c = ScalarField(np.full(8, 1.7), fine)
    np.testing.assert_allclose(restrict(c, make_grid(1.0, 0.5)).values, 1.7, atol=0)
    lin = ScalarField(fine.cell_centers, fine)
    coarse = make_grid(1.0, 0.5)
    np.testing.assert_allclose(restrict(lin, coarse).values, coarse.cell_centers, atol=1e-15)
    with pytest.raises(IncompatibleRefinement):
        restrict(f, make_grid(1.0, 2 / 3))
    with pytest.raises(IncompatibleRefinement):
        restrict(f, make_grid(2.0, 0.5))


@given(st.integers(0, 2 ** 31), st.sampled_from([1, 2, 4, 8]))
def test_restrict_mass_and_tv(seed, ratio):
    rng = np.random.default_rng(seed)
    coarse = make_grid(1.0, 0.125)
    fine = make_grid(1.0, 0.125 / ratio)
    f = ScalarField(rng.normal(size=fine.num_cells), fine)
    r = restrict(f, coarse)
    assert abs(np.sum(r.values) * coarse.dx - np.sum(f.values) * fine.dx) <= 1e-12
    assert total_variation(r) <= total_variation(f) + 1e-12


def test_l1_distance_restricts_to_coarse():
    coarse, fine = make_grid(1.0, 0.5), make_grid(1.0, 0.25)
    a = ScalarField(coarse.cell_centers, coarse)
    b = ScalarField(fine.cell_centers, fine)
    assert l1_distance(a, b) == pytest.approx(0.0, abs=1e-15)
    assert l1_distance(b, a) == pytest.approx(0.0, abs=1e-15)


def test_observed_order_exact():
    dx = np.array([0.1, 0.05, 0.025, 0.0125])
    assert observed_order(zip(dx, 3 * dx)) == pytest.approx(1.0, abs=1e-12)
    assert observed_order(zip(dx, 3 * dx ** 2)) == pytest.approx(2.0, abs=1e-12)


def test_observed_order_noisy_synthetic():
    rng = np.random.default_rng(0)
    dx = 0.1 / 2 ** np.arange(5)
    err = 0.7 * dx ** 0.5 * np.exp(rng.normal(scale=0.01, size=5))
    assert observed_order(zip(dx, err)) == pytest.approx(0.5, abs=0.02)


@given(st.floats(1e-6, 1e6))
def test_observed_order_scale_invariant(c):
    dx = np.array([0.2, 0.1, 0.05])
    err = np.array([0.3, 0.2, 0.11])
    assert observed_order(zip(dx, c * err)) == pytest.approx(observed_order(zip(dx, err)), abs=1e-9)


def test_observed_order_degenerate():
    with pytest.raises(DegenerateFit):
        observed_order([(0.1, 0.0), (0.05, 0.01), (0.025, 0.001)])
    with pytest.raises(DegenerateFit):
        observed_order([(0.1, 0.1), (0.05, 0.01)])


def test_convergence_report_invariants():
    r = ConvergenceReport.from_levels([0.1, 0.05, 0.025], [0.01, 0.005, 0.0025], [0.4, 0.2, 0.1])
    assert r.fitted_order == pytest.approx(1.0)
    assert r.levels[0] == (0.1, 0.01, 0.4)
    with pytest.raises(DegenerateFit):
        ConvergenceReport.from_levels([0.1, 0.1, 0.05], [1, 1, 1], [1, 1, 1])
    with pytest.raises(DegenerateFit):
        ConvergenceReport.from_levels([0.1, 0.05], [1, 1], [1, 1])


def test_deterministic_run_has_no_violations_at_zero_tolerance():
    spec, u0 = preset_example_1(0.5)
    quiet = spec.without_noise()
    g = make_grid(1.0, 0.04)
    f0 = project_initial(u0, g)
    stats = run_ensemble(quiet, g, make_time_grid(0.2, 0.002), f0, 1, 0, snapshot_stride=1)
    v = bound_verdicts(stats, f0, quiet, linf_tol=0.0, tv_tol=0.0, max_violation_fraction=0.0)
    assert v.passed
    assert v.extra["violation_fraction"] == 0.0
    assert len(v.lines()) == 2 and all(line.startswith("PASS") for line in v.lines())


def test_verdict_reports_rather_than_raises_for_uncut_sigma():
    spec, u0 = preset_example_1(0.5)
    wild = ProblemSpec(spec.flux, spec.diffusion, 0.5, lambda u: 3.0 * np.asarray(u, dtype=float), 3.0, 1.0)
    g = make_grid(1.0, 0.04)
    f0 = project_initial(u0, g)
    stats = run_ensemble(wild, g, make_time_grid(0.2, 0.002), f0, 8, 0)
    v = bound_verdicts(stats, f0, wild)
    assert isinstance(v.passed, bool)
    assert v.linf.bound == 2.0
