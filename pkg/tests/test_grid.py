import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from fractsplit.errors import DegenerateGrid, GridMismatch, NonCommensurate, NonFiniteInput
from fractsplit.grid import Grid1D, ScalarField, grid_from_cells, make_grid, make_time_grid, project_initial
from fractsplit.presets import example2_u0


def test_make_grid_four_cells():
    g = make_grid(1.0, 0.5)
    assert g.num_cells == 4
    np.testing.assert_allclose(g.cell_centers, [-0.75, -0.25, 0.25, 0.75], atol=1e-15)


def test_make_grid_three_cells():
    assert make_grid(1.0, 2.0 / 3.0).num_cells == 3


def test_make_grid_rejects_non_commensurate():
    with pytest.raises(NonCommensurate):
        make_grid(1.0, 0.3)


def test_make_grid_rejects_too_few_cells():
    with pytest.raises(DegenerateGrid):
        make_grid(1.0, 1.0)


@pytest.mark.parametrize("k,dx", [(0.0, 0.1), (1.0, 0.0), (-1.0, 0.1), (1.0, -0.5)])
def test_make_grid_rejects_nonpositive(k, dx):
    with pytest.raises(ValueError):
        make_grid(k, dx)


@given(st.floats(0.1, 10.0), st.integers(3, 2000))
def test_centers_equispaced(k, n):
    g = grid_from_cells(k, n)
    assert abs(g.num_cells * g.dx - 2 * k) <= 1e-12 * k
    x = g.cell_centers
    assert np.max(np.abs(np.diff(x) - g.dx)) <= 1e-12 * max(1.0, k)
    assert x[0] == pytest.approx(-k + 0.5 * g.dx, abs=1e-12 * k)


def test_cell_centers_read_only():
    g = make_grid(1.0, 0.25)
    with pytest.raises(ValueError):
        g.cell_centers[0] = 3.0


def test_time_grid():
    t = make_time_grid(1.0, 0.002)
    assert t.num_steps == 500
    assert t.times[-1] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        make_time_grid(1.0, 0.3)


def test_scalar_field_checks():
    g = make_grid(1.0, 0.5)
    with pytest.raises(GridMismatch):
        ScalarField(np.zeros(3), g)
    with pytest.raises(NonFiniteInput):
        ScalarField(np.array([0.0, np.nan, 0.0, 0.0]), g)
    f = ScalarField(np.zeros(4), g)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(GridMismatch):
        f.check_grid(make_grid(1.0, 0.25))


def test_project_constant_exact():
    g = make_grid(1.0, 0.1)
    f = project_initial(lambda x: np.full_like(x, 0.37), g)
    assert np.all(f.values == pytest.approx(0.37, abs=1e-15))


def test_project_linear_gives_centers():
    g = make_grid(1.0, 0.5)
    f = project_initial(lambda x: x, g)
    np.testing.assert_allclose(f.values, [-0.75, -0.25, 0.25, 0.75], atol=1e-15)


@pytest.mark.parametrize("degree", range(10))
def test_project_exact_for_degree_le_9(degree):
    g = make_grid(1.0, 0.25)
    f = project_initial(lambda x: x ** degree, g)
    e = g.edges
    exact = (e[1:] ** (degree + 1) - e[:-1] ** (degree + 1)) / ((degree + 1) * g.dx)
    np.testing.assert_allclose(f.values, exact, atol=1e-12)


def _bump_reference(g):
    e = g.edges
    return np.array([quad(lambda x: float(example2_u0(x)), a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0] / g.dx
                     for a, b in zip(e[:-1], e[1:])])


@pytest.mark.parametrize("dx", [0.02, 0.01])
def test_project_bump_matches_adaptive_quadrature(dx):
    g = make_grid(1.0, dx)
    np.testing.assert_allclose(project_initial(example2_u0, g).values, _bump_reference(g), rtol=0, atol=1e-10)


def test_project_bump_coarse_grid_error_is_small():
    # the bump is flat to all orders at +-1, so five nodes lose accuracy only on coarse grids
    g = make_grid(1.0, 0.1)
    np.testing.assert_allclose(project_initial(example2_u0, g).values, _bump_reference(g), rtol=0, atol=1e-6)


def test_project_rejects_nan():
    g = make_grid(1.0, 0.5)
    with pytest.raises(NonFiniteInput):
        project_initial(lambda x: np.where(x > 0.5, np.nan, 0.0), g)


def test_refined_grid():
    g = make_grid(1.0, 0.5)
    r = g.refined()
    assert r.num_cells == 8 and r.dx == 0.25
    assert isinstance(r, Grid1D)
