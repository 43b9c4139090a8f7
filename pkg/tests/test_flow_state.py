import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ricciplane.errors import PositivityError
from ricciplane.flow_state import ConformalFlowState, gauss_curvature_1d, gauss_curvature_2d
from ricciplane.grid_fd import make_uniform_grid
from ricciplane.soliton import soliton_u


def state(grid, u, t=1.0):
    return ConformalFlowState.from_values(grid, u, t)


def test_flat_plane_has_zero_curvature():
    g = make_uniform_grid(-1, 1, 21)
    assert np.all(gauss_curvature_1d(state(g, np.ones(21))).field.values == 0)


def test_gaussian_factor():
    # u = exp(-x^2): log u = -x^2, so K = exp(x^2) exactly; the stencil is exact on x^2
    g = make_uniform_grid(-1, 1, 201)
    k = gauss_curvature_1d(state(g, np.exp(-g.nodes ** 2))).field.values
    assert abs(k[100] - 1.0) < 1e-10
    np.testing.assert_allclose(k[1:-1], np.exp(g.nodes[1:-1] ** 2), rtol=1e-9)


def test_soliton_curvature_at_origin():
    t = 0.5
    errs = []
    for n in (201, 401):
        g = make_uniform_grid(-5, 5, n)
        k = gauss_curvature_1d(state(g, soliton_u(g.nodes, t), t)).field.values
        errs.append(abs(k[n // 2] - 1.0))
    assert errs[0] < 0.01
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_nonpositive_factor_rejected():
    g = make_uniform_grid(0, 1, 5)
    with pytest.raises(PositivityError):
        state(g, [1, 1, 0, 1, 1])


def _grid2(lo, hi, n):
    return make_uniform_grid(lo, hi, n), make_uniform_grid(lo, hi, n)


def test_2d_flat():
    gx, gy = _grid2(-1, 1, 11)
    k = gauss_curvature_2d(np.ones((11, 11)), gx, gy)
    assert np.all(k[1:-1, 1:-1] == 0) and np.all(np.isnan(k[0]))


@pytest.mark.parametrize("kind", ["sphere", "hyperbolic"])
def test_2d_space_form_charts(kind):
    errs = []
    for n in (81, 161):
        if kind == "sphere":
            gx, gy = _grid2(-2, 2, n)
        else:
            gx, gy = _grid2(-0.9, 0.9, n)
        X, Y = np.meshgrid(gx.nodes, gy.nodes)
        r2 = X ** 2 + Y ** 2
        if kind == "sphere":
            u, expected, mask = 4 / (1 + r2) ** 2, 1.0, np.ones_like(r2, bool)
        else:
            u, expected, mask = 4 / (1 - r2) ** 2, -1.0, r2 <= 0.64
        k = gauss_curvature_2d(u, gx, gy)
        mask[[0, -1], :] = mask[:, [0, -1]] = False
        errs.append(np.max(np.abs(k[mask] - expected)))
    assert errs[1] < 0.01
    assert errs[0] / errs[1] > 3.5


def test_2d_agrees_with_1d_for_extruded_factor():
    g = make_uniform_grid(-3, 3, 61)
    gy = make_uniform_grid(0, 1, 7)
    u1 = soliton_u(g.nodes, 0.7)
    k1 = gauss_curvature_1d(state(g, u1)).field.values
    k2 = gauss_curvature_2d(np.tile(u1, (7, 1)), g, gy)
    np.testing.assert_array_equal(k2[3, 1:-1], k1[1:-1])


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.01, 100), t=st.floats(0.1, 3))
def test_constant_rescaling_divides_curvature(c, t):
    g = make_uniform_grid(-4, 4, 81)
    u = soliton_u(g.nodes, t)
    k = gauss_curvature_1d(state(g, u)).field.values
    kc = gauss_curvature_1d(state(g, c * u)).field.values
    np.testing.assert_allclose(kc, k / c, rtol=1e-7, atol=1e-9 * np.max(np.abs(k)) / c)
