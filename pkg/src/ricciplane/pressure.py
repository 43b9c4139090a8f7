"""Pressure w = 1/u, q = w_xx, and the inequality/identity checks built on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientStates, InvalidArgument
from .flow_state import ConformalFlowState, gauss_curvature_values, require_positive
from .grid_fd import ScalarField, d1, d2, interior_slice


@dataclass(frozen=True)
class PressureDiagnostics:
    w: ScalarField
    q: ScalarField  # endpoint entries are stencil sentinels
    time: float


@dataclass(frozen=True)
class BoundReport:
    quantity: str
    sup: float
    inf: float
    bound: float
    margin: float
    tolerance: float
    passed: bool
    time: float
    excluded_nodes: int

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def compute_pressure(state: ConformalFlowState) -> PressureDiagnostics:
    u = require_positive(state.u)
    w = 1.0 / u
    q = d2(w, state.grid.h)
    return PressureDiagnostics(ScalarField(state.grid, w), ScalarField(state.grid, q), state.time)


def _elapsed(time, t_origin):
    s = time - t_origin
    if not s > 0:
        raise InvalidArgument(f"bounds need t - t_origin > 0, got {s}")
    return s


def check_q_bound(diag: PressureDiagnostics, alpha: float = 1.0, tol: float = 0.0,
                  t_origin: float = 0.0) -> BoundReport:
    """q <= 1/(alpha t) over interior nodes, with t measured from ``t_origin``."""
    if not alpha > 0:
        raise InvalidArgument("alpha must be positive")
    s = _elapsed(diag.time, t_origin)
    n = diag.q.grid.n
    q = diag.q.values[interior_slice(n)]
    bound = 1.0 / (alpha * s)
    margin = bound - float(q.max())
    return BoundReport("q", float(q.max()), float(q.min()), bound, margin, tol,
                       margin >= -tol, diag.time, n - len(q))


def check_curvature_bounds(state: ConformalFlowState, tol: float = 0.0,
                           t_origin: float = 0.0):
    """Upper K <= 1/(2t) and lower K >= -1/(2t) reports over interior nodes."""
    s = _elapsed(state.time, t_origin)
    n = state.grid.n
    k = gauss_curvature_values(state.u, state.grid.h)[interior_slice(n)]
    bound = 1.0 / (2 * s)
    kmax, kmin = float(k.max()), float(k.min())
    upper = BoundReport("K_upper", kmax, kmin, bound, bound - kmax, tol,
                        bound - kmax >= -tol, state.time, n - len(k))
    lower = BoundReport("K_lower", kmax, kmin, -bound, kmin + bound, tol,
                        kmin + bound >= -tol, state.time, n - len(k))
    return upper, lower


def curvature_identity_terms(state: ConformalFlowState):
    """Stencil values of (2K, (log u)_x^2 / u, q) on the full grid."""
    u = require_positive(state.u)
    h = state.grid.h
    two_k = 2 * gauss_curvature_values(u, h)
    grad = d1(np.log(u), h) ** 2 / u
    q = d2(1.0 / u, h)
    return two_k, grad, q


def check_curvature_identity(state: ConformalFlowState) -> float:
    """max interior |2K + (log u)_x^2 / u - q|."""
    two_k, grad, q = curvature_identity_terms(state)
    r = (two_k + grad - q)[interior_slice(state.grid.n)]
    return float(np.max(np.abs(r)))


def check_q_evolution(traj) -> float:
    """max interior |q_t - (w q_xx - q^2)| with q_t by central differences in time.

    Uses every state that has a neighbour on each side.
    """
    states = list(traj)
    if len(states) < 3:
        raise InsufficientStates(f"need at least 3 states, got {len(states)}")
    h = states[0].grid.h
    n = states[0].grid.n
    qs = [compute_pressure(s).q.values for s in states]
    sl = interior_slice(n)
    worst = 0.0
    for i in range(1, len(states) - 1):
        dt = states[i + 1].time - states[i - 1].time
        q_t = (qs[i + 1] - qs[i - 1]) / dt
        w = 1.0 / states[i].u
        q = qs[i]
        rhs = w * d2(q, h) - q * q
        worst = max(worst, float(np.max(np.abs(q_t - rhs)[sl])))
    return worst


def q_evolution_scale(traj) -> float:
    """The O(dt + h^2) scale against which the q-evolution residual is read."""
    states = list(traj)
    return float(np.max(np.diff([s.time for s in states]))) + states[0].grid.h ** 2


def window_tolerance(time: float, t_origin: float = 0.0, scale: float = 0.05) -> float:
    """Tolerance carrying the 1/t dimension of the bounds: scale / (t - t_origin)."""
    return scale / _elapsed(time, t_origin)
