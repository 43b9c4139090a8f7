import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ricciplane.errors import BallTruncated, DomainError, InvalidArgument
from ricciplane.evolve import EvolutionConfig, evolve
from ricciplane.flow_state import ConformalFlowState
from ricciplane.grid_fd import ScalarField, make_uniform_grid
from ricciplane.distance import (PathMetricGraph, attainment_report, build_graph, flat_graph,
                                 grid_distance, pair_distances, random_pairs, stencil_offsets,
                                 stencil_overestimate, straight_line_length, volume_ratio)
from ricciplane.soliton import soliton_axis_length, soliton_u


def state_of(values_fn, L=5.0, n=501, t=0.5):
    g = make_uniform_grid(-L, L, n)
    return ConformalFlowState.from_values(g, values_fn(g.nodes), t)


def soliton_state(t=0.5, L=5.0, n=501):
    return state_of(lambda x: soliton_u(x, t), L, n, t)


class TestStencil:
    def test_neighbour_counts(self):
        assert len(stencil_offsets(1)) == 4
        assert len(stencil_offsets(2)) == 8

    def test_overestimate_factor(self):
        assert stencil_overestimate(2) == pytest.approx(1 / math.cos(math.atan(0.5) / 2), rel=1e-14)
        assert stencil_overestimate(1) == pytest.approx(1 / math.cos(math.pi / 8), rel=1e-14)
        assert stencil_overestimate(2) < 1.03

    def test_bad_order(self):
        with pytest.raises(InvalidArgument):
            stencil_offsets(3)


class TestStraightLine:
    def test_flat(self):
        assert straight_line_length(state_of(np.ones_like), 0, 3) == pytest.approx(3, abs=1e-13)

    def test_scaled(self):
        s = state_of(lambda x: np.full_like(x, 4.0))
        assert straight_line_length(s, 0, 3) == pytest.approx(6, abs=1e-13)

    def test_soliton(self):
        s = soliton_state(0.5, n=2001)
        exact = math.asinh(2.0)
        assert exact == pytest.approx(1.44364, abs=1e-5)
        assert soliton_axis_length(0, 1, 0.5) == pytest.approx(exact, rel=1e-14)
        by_quad = quad(lambda x: math.sqrt(soliton_u(x, 0.5)), 0, 1)[0]
        assert by_quad == pytest.approx(exact, rel=1e-12)
        assert straight_line_length(s, 0, 1) == pytest.approx(exact, abs=1e-8)

    def test_off_node_endpoints(self):
        s = soliton_state(0.5, n=2001)
        exact = soliton_axis_length(0.0013, 0.9971, 0.5)
        assert straight_line_length(s, 0.0013, 0.9971) == pytest.approx(exact, abs=1e-8)

    def test_reversed_and_empty(self):
        s = soliton_state()
        assert straight_line_length(s, 1, 0) == straight_line_length(s, 0, 1)
        assert straight_line_length(s, 0.3, 0.3) == 0.0

    def test_out_of_domain(self):
        with pytest.raises(DomainError):
            straight_line_length(soliton_state(), 0, 6)


class TestGridDistance:
    def test_flat_pythagoras(self):
        g = flat_graph((-0.5, 3.5, -0.5, 4.5), 0.05)
        d = grid_distance(g, (0, 0), (3, 4))
        assert 5.0 <= d <= 5.0 * 1.03

    def test_same_point(self):
        g = flat_graph((-1, 1, -1, 1), 0.1)
        assert grid_distance(g, (0, 0), (0, 0)) == 0.0

    def test_soliton_axis_upper_bound(self):
        s = soliton_state(0.5, n=1001)
        h = s.grid.h
        g = build_graph(s, (-1, 2, -1.5, 1.5))
        bound = straight_line_length(s, 0, 1) + 2 * h * math.sqrt(s.u.max())
        assert grid_distance(g, (0, 0), (1, 0)) <= bound

    def test_point_outside(self):
        g = flat_graph((-1, 1, -1, 1), 0.1)
        with pytest.raises(DomainError):
            g.node((2, 0))

    def test_window_outside_state(self):
        with pytest.raises(DomainError):
            build_graph(soliton_state(), (-6, 0, -1, 1))

    def test_metric_axioms(self):
        s = soliton_state(0.3, n=1001)
        g = build_graph(s, (-1.5, 1.5, -1.5, 1.5), h=0.05)
        rng = np.random.default_rng(3)
        for p, q, r in rng.integers(0, g.u.size, size=(100, 3)):
            dpq = grid_distance(g, p, q)
            assert dpq == grid_distance(g, q, p)
            assert dpq <= grid_distance(g, p, r) + grid_distance(g, r, q) + 1e-12

    def test_stencil_sandwich(self):
        s = soliton_state(0.3, n=1001)
        win = (-1.5, 1.5, -1.5, 1.5)
        pairs = random_pairs(30, (-1, 1, -1, 1), seed=5, h=0.05)
        d1 = pair_distances(build_graph(s, win, 0.05, 1), pairs)
        d2 = pair_distances(build_graph(s, win, 0.05, 2), pairs)
        assert np.all(d2 <= d1 + 1e-12)
        # admissible flat comparison: u >= min u over the window
        umin = float(np.interp(1.5, s.grid.nodes, s.u))
        lower = np.array([math.dist(p, q) for p, q in pairs]) * math.sqrt(umin)
        assert np.all(d2 >= lower - 1e-12)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), amp=st.floats(0.0, 2.0))
def test_monotone_in_factor(seed, amp):
    rng = np.random.default_rng(seed)
    x = np.linspace(-1.5, 1.5, 31)
    y = np.linspace(-1.5, 1.5, 31)
    ub = 1 + rng.uniform(0, 1, (31, 31))
    ua = ub + amp * rng.uniform(0, 1, (31, 31))
    ga, gb = PathMetricGraph(x, y, ua), PathMetricGraph(x, y, ub)
    src = rng.integers(0, 31 * 31, 5)
    assert np.all(ga.distances_from(src) >= gb.distances_from(src) - 1e-12)


class TestVolumeRatio:
    def test_flat(self):
        g = flat_graph((-1.5, 1.5, -1.5, 1.5), 0.02)
        assert volume_ratio(g, (0, 0), 1.0) == pytest.approx(1.0, abs=0.03)

    def test_scaled_flat(self):
        s = state_of(lambda x: np.full_like(x, 4.0))
        assert volume_ratio(s, (0, 0), 1.0, h=0.02) == pytest.approx(1.0, abs=0.03)

    def test_soliton_ratios_positive(self):
        s = soliton_state(0.5, L=10, n=2001)
        for r in (0.25, 0.5, 1.0):
            assert volume_ratio(s, (0, 0), r) >= 0.2

    def test_truncated(self):
        g = flat_graph((-0.5, 0.5, -0.5, 0.5), 0.02)
        with pytest.raises(BallTruncated):
            volume_ratio(g, (0, 0), 1.0)

    def test_state_too_small(self):
        s = state_of(np.ones_like, L=0.5, n=51)
        with pytest.raises(BallTruncated):
            volume_ratio(s, (0, 0), 1.0)

    def test_bad_radius(self):
        with pytest.raises(InvalidArgument):
            volume_ratio(flat_graph((-1, 1, -1, 1), 0.1), (0, 0), 0.0)


class TestAttainment:
    def test_static(self):
        g = make_uniform_grid(-2, 2, 81)
        cfg = EvolutionConfig(g, 0.0, 1.0, 0.1, "zero_flux", output_times=(0.0, 0.5, 1.0))
        traj = evolve(ScalarField(g, np.ones(81)), cfg)
        pairs = random_pairs(20, (-1, 1, -1, 1), seed=1)
        rows = attainment_report(traj, pairs, window=(-1.5, 1.5, -1.5, 1.5), h=0.05)
        devs = [r.sup_deviation for r in rows]
        diam = max(math.dist(p, q) for p, q in pairs)
        assert devs[0] == devs[1] == devs[2]
        assert devs[0] <= (stencil_overestimate(2) - 1) * diam + 1e-12
        assert all(r.max_K == 0 for r in rows)

    def test_margin_violation(self):
        g = make_uniform_grid(-2, 2, 81)
        traj = evolve(ScalarField(g, np.ones(81)), EvolutionConfig(g, 0.0, 0.1, 0.1, "zero_flux"))
        with pytest.raises(DomainError):
            attainment_report(traj, [((-1.45, 0), (0, 0))], window=(-1.5, 1.5, -1.5, 1.5))

    def test_soliton_does_not_attain_euclidean(self):
        # the horizontal geodesic between (-1, 0) and (1, 0) has length 2 sqrt(2t) asinh(1/t),
        # which never settles at the Euclidean value 2
        times = (0.4, 0.2, 0.1, 0.05)
        states = [soliton_state(t, L=3, n=1201) for t in times]
        rows = attainment_report(states, [((-1.0, 0.0), (1.0, 0.0))],
                                 window=(-1.5, 1.5, -1.5, 1.5), h=0.005)
        axis = np.array([soliton_axis_length(-1, 1, t) for t in times])
        devs = np.array([r.sup_deviation for r in rows])
        np.testing.assert_allclose(devs, np.abs(axis - 2), atol=0.01)
        assert devs.min() > 0.3
        assert all(r.max_K > 1 for r in rows)
        # and the length collapses to zero as t -> 0
        assert soliton_axis_length(-1, 1, 1e-6) < 0.05
