import numpy as np
import pytest

from ricciplane.errors import InsufficientStates, PositivityError
from ricciplane.evolve import EvolutionConfig, MeasureInitialData, evolve, mollify_initial_data
from ricciplane.flow_state import ConformalFlowState
from ricciplane.grid_fd import make_uniform_grid
from ricciplane.pressure import (check_curvature_bounds, check_curvature_identity, check_q_bound,
                                 check_q_evolution, compute_pressure, window_tolerance)
from ricciplane.soliton import soliton_u


def soliton_state(t, n=401, L=5.0):
    g = make_uniform_grid(-L, L, n)
    return ConformalFlowState.from_values(g, soliton_u(g.nodes, t), t)


def flat(t=1.0, value=1.0, n=41):
    g = make_uniform_grid(-1, 1, n)
    return ConformalFlowState.from_values(g, np.full(n, value), t)


def test_constant_pressure():
    d = compute_pressure(flat(value=2.0))
    assert np.all(d.w.values == 0.5) and np.all(d.q.values == 0)


def test_soliton_q_is_inverse_time():
    s = soliton_state(0.25)
    d = compute_pressure(s)
    np.testing.assert_allclose(d.w.values, (0.0625 + s.grid.nodes ** 2) / 0.5, rtol=1e-15)
    np.testing.assert_allclose(d.q.values, 4.0, atol=1e-10)


def test_reciprocal_exactness():
    for t in (0.1, 0.5, 2.0):
        s = soliton_state(t)
        assert np.max(np.abs(compute_pressure(s).w.values * s.u - 1)) <= 1e-15


def test_positivity_violation():
    with pytest.raises(PositivityError):
        flat(value=-1.0)


class TestQBound:
    def test_attained_on_soliton(self):
        r = check_q_bound(compute_pressure(soliton_state(0.5)), 1.0, 1e-8)
        assert r.passed and abs(r.margin) <= 1e-10 and r.excluded_nodes == 4
        # analytic attainment |q t - 1| is covered in test_soliton; here the stencil route
        assert abs(r.sup * 0.5 - 1) <= 1e-10

    def test_flat(self):
        r = check_q_bound(compute_pressure(flat()), 1.0, 0.0)
        assert r.passed and r.margin == 1.0

    def test_constructed_violation(self):
        g = make_uniform_grid(-1, 1, 41)
        # w = 1 + 1.5 x^2 has q = 3 exactly
        s = ConformalFlowState.from_values(g, 1 / (1 + 1.5 * g.nodes ** 2), 1.0)
        r = check_q_bound(compute_pressure(s), 1.0, 0.01)
        assert not r.passed and r.margin == pytest.approx(-2.0, abs=1e-9)


class TestCurvatureBounds:
    def test_soliton_upper_bound_sharp(self):
        margins = []
        for n in (401, 801):
            up, lo = check_curvature_bounds(soliton_state(0.5, n), 1e-6)
            assert up.passed and lo.passed and lo.margin > 0
            margins.append(up.margin)
        # the stencil approaches the attained bound from below at second order
        assert 0 <= margins[1] < margins[0] < 2e-3
        assert 3.5 < margins[0] / margins[1] < 4.5

    def test_flat(self):
        up, lo = check_curvature_bounds(flat(), 0.0)
        assert up.margin == 0.5 and lo.margin == 0.5 and up.passed and lo.passed

    def test_mollified_state_after_four_diffusion_times(self):
        eps = 0.05
        g = make_uniform_grid(-10, 10, 2001)
        u0 = mollify_initial_data(MeasureInitialData(1.0, 1.0, eps), g)
        t = 4 * eps ** 2
        s = evolve(u0, EvolutionConfig(g, 0.0, t, 1e-4, output_times=(t,))).states[-1]
        up, lo = check_curvature_bounds(s, window_tolerance(t))
        assert up.passed and lo.passed


class TestIdentity:
    def test_constant(self):
        assert check_curvature_identity(flat(value=3.3)) == 0.0

    @pytest.mark.parametrize("t", [0.25, 0.5, 2.0])
    def test_peak_residual_matches_expansion(self, t):
        # symbolic expansion of the three stencils at x = 0:
        # residual = -h^2/(2 t^3) + h^4/(3 t^5) + O(h^6)
        from ricciplane.pressure import curvature_identity_terms
        for n in (201, 401, 801):
            s = soliton_state(t, n)
            two_k, grad, q = curvature_identity_terms(s)
            c = n // 2
            h = s.grid.h
            predicted = -h ** 2 / (2 * t ** 3) + h ** 4 / (3 * t ** 5)
            assert abs(two_k[c] + grad[c] - q[c] - predicted) <= 2 * h ** 6 / t ** 7 + 1e-11
            assert check_curvature_identity(s) == pytest.approx(abs(two_k[c] + grad[c] - q[c]), rel=1e-12)

    def test_stencil_convergence(self):
        res = [check_curvature_identity(soliton_state(0.5, n)) for n in (201, 401, 801)]
        orders = np.log2(np.array(res[:-1]) / res[1:])
        assert np.all(orders >= 2 - 0.05), orders


class TestQEvolution:
    def test_static(self):
        states = [flat(t) for t in (1.0, 1.1, 1.2)]
        assert check_q_evolution(states) == 0.0

    def test_soliton_states(self):
        d = 1e-3
        states = [soliton_state(t) for t in (0.5 - d, 0.5, 0.5 + d)]
        assert check_q_evolution(states) <= 1e-4

    def test_insufficient(self):
        with pytest.raises(InsufficientStates):
            check_q_evolution([flat(1.0), flat(2.0)])

    def test_solver_residual_shrinks_under_refinement(self):
        res = []
        for n, dt in ((1001, 4e-4), (2001, 1e-4)):
            g = make_uniform_grid(-10, 10, n)
            u0 = mollify_initial_data(MeasureInitialData(1.0, 1.0, 0.1), g)
            cfg = EvolutionConfig(g, 0.0, 0.06, dt, output_times=(0.049, 0.05, 0.051))
            res.append(check_q_evolution(evolve(u0, cfg)))
        assert res[1] < res[0] / 3
