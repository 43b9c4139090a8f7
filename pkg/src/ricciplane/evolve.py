"""Backward-Euler/Newton solver for u_t = (log u)_xx on a 1D grid."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.linalg import solve_banded

from .errors import InvalidArgument, NewtonFailure, PositivityError, UnderResolved
from .flow_state import ConformalFlowState, require_positive
from .grid_fd import Grid1D, ScalarField
from .soliton import soliton_u

log = logging.getLogger(__name__)

BOUNDARY_MODES = ("exact_soliton", "constant_farfield", "zero_flux")
MAX_HALVINGS = 10


@dataclass(frozen=True)
class EvolutionConfig:
    grid: Grid1D
    t_start: float
    t_end: float
    dt: float
    boundary_mode: str = "constant_farfield"
    farfield_value: float = 1.0
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    output_times: tuple = ()

    def __post_init__(self):
        if self.boundary_mode not in BOUNDARY_MODES:
            raise InvalidArgument(f"unknown boundary_mode {self.boundary_mode!r}")
        if not self.t_start >= 0 or not self.t_end > self.t_start:
            raise InvalidArgument(f"need 0 <= t_start < t_end, got {self.t_start}, {self.t_end}")
        if not self.dt > 0:
            raise InvalidArgument(f"dt must be positive, got {self.dt}")
        if self.boundary_mode == "constant_farfield" and not self.farfield_value > 0:
            raise InvalidArgument("constant_farfield value must be positive")
        if self.boundary_mode == "exact_soliton" and self.t_start <= 0:
            raise InvalidArgument("exact_soliton boundaries need t_start > 0")
        times = tuple(float(t) for t in (self.output_times or (self.t_end,)))
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidArgument("output_times must be strictly ascending")
        if times[0] < self.t_start or times[-1] > self.t_end:
            raise InvalidArgument("output_times must lie in [t_start, t_end]")
        object.__setattr__(self, "output_times", times)


@dataclass(frozen=True)
class MeasureInitialData:
    """Lebesgue density ``background`` plus ``line_mass`` times a mollified line measure."""
    background: float = 1.0
    line_mass: float = 1.0
    mollifier_width: float = 0.05
    mollifier_kind: str = "gaussian"

    def __post_init__(self):
        if not self.background > 0:
            raise InvalidArgument("background density must be positive")
        if self.line_mass < 0:
            raise InvalidArgument("line_mass must be non-negative")
        if not self.mollifier_width > 0:
            raise InvalidArgument("mollifier_width must be positive")
        if self.mollifier_kind not in ("gaussian", "bump"):
            raise InvalidArgument(f"unknown mollifier_kind {self.mollifier_kind!r}")


@dataclass(frozen=True)
class Trajectory:
    states: tuple
    config: EvolutionConfig
    newton_iterations: int = field(default=0, compare=False)

    def __post_init__(self):
        times = [s.time for s in self.states]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidArgument("trajectory times must be strictly increasing")

    @property
    def times(self):
        return [s.time for s in self.states]

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


@lru_cache(maxsize=None)
def _bump_integral():
    return quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1, 1, epsabs=1e-14, epsrel=1e-14)[0]


def mollifier(x, width, kind="gaussian"):
    x = np.asarray(x, dtype=float)
    if kind == "gaussian":
        return np.exp(-0.5 * (x / width) ** 2) / (width * math.sqrt(2 * math.pi))
    s = x / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out / (width * _bump_integral())


def mollify_initial_data(data: MeasureInitialData, grid: Grid1D) -> ScalarField:
    if data.mollifier_width < 3 * grid.h:
        raise UnderResolved(
            f"mollifier width {data.mollifier_width} < 3h = {3 * grid.h}; refine the grid")
    phi = mollifier(grid.nodes, data.mollifier_width, data.mollifier_kind)
    if data.mollifier_kind == "bump":
        # few nodes across the support; fix the mass on the grid itself
        phi = phi / trapezoid(phi, dx=grid.h)
    return ScalarField(grid, data.background + data.line_mass * phi)


def _boundary_values(config: EvolutionConfig, t: float):
    g = config.grid
    if config.boundary_mode == "exact_soliton":
        return float(soliton_u(g.x_min, t)), float(soliton_u(g.x_max, t))
    if config.boundary_mode == "constant_farfield":
        return config.farfield_value, config.farfield_value
    return None


def _residual(u, u_old, c, neumann):
    v = np.log(u)
    lap = np.empty_like(v)
    lap[1:-1] = v[2:] - 2 * v[1:-1] + v[:-2]
    if neumann:
        lap[0] = 2 * (v[1] - v[0])
        lap[-1] = 2 * (v[-2] - v[-1])
    else:
        lap[0] = lap[-1] = 0.0
    r = u - u_old - c * lap
    if not neumann:
        r[0] = r[-1] = 0.0
    return r


def _newton_solve(u_old, guess, c, neumann, tol, max_iter):
    """Solve u - u_old - c*L(log u) = 0. Returns (u, iterations)."""
    u = guess.copy()
    lo = 0 if neumann else 1
    hi = len(u) if neumann else len(u) - 1
    m = hi - lo
    for it in range(max_iter + 1):
        r = _residual(u, u_old, c, neumann)
        if np.max(np.abs(r)) <= tol:
            return u, it
        if it == max_iter:
            break
        inv = 1.0 / u
        ab = np.zeros((3, m))
        ab[1] = 1 + 2 * c * inv[lo:hi]
        ab[0, 1:] = -c * inv[lo + 1:hi]
        ab[2, :-1] = -c * inv[lo:hi - 1]
        if neumann:
            ab[0, 1] = -2 * c * inv[1]
            ab[2, -2] = -2 * c * inv[-2]
        delta = -solve_banded((1, 1), ab, r[lo:hi])
        step = 1.0
        while np.any(u[lo:hi] + step * delta <= 0):
            step *= 0.5
            if step < 2.0**-40:
                raise PositivityError("Newton damping could not keep u positive")
        u[lo:hi] += step * delta
    raise NewtonFailure(
        f"Newton did not reach residual {tol:g} in {max_iter} iterations "
        f"(last residual {np.max(np.abs(r)):.3e})")


def implicit_step(state: ConformalFlowState, dt: float, config: EvolutionConfig,
                  _stats=None) -> ConformalFlowState:
    """One backward-Euler step of size ``dt`` solved by damped Newton."""
    require_positive(state.u)
    if not dt > 0:
        raise InvalidArgument(f"dt must be positive, got {dt}")
    g = state.grid
    t_new = state.time + dt
    u_old = np.array(state.u, dtype=float)
    guess = u_old.copy()
    bv = _boundary_values(config, t_new)
    neumann = bv is None
    if not neumann:
        u_old[0], u_old[-1] = bv
        guess[0], guess[-1] = bv
    c = dt / (g.h * g.h)
    try:
        u, its = _newton_solve(u_old, guess, c, neumann, config.newton_tol, config.newton_max_iter)
    except NewtonFailure as exc:
        exc.time = state.time
        raise
    if _stats is not None:
        _stats["newton"] = _stats.get("newton", 0) + its
    return ConformalFlowState(ScalarField(g, u), t_new)


def _advance(state, dt, config, stats, depth=0):
    try:
        return implicit_step(state, dt, config, stats)
    except NewtonFailure:
        if depth >= MAX_HALVINGS:
            raise
        log.debug("Newton failure at t=%g with dt=%g; halving", state.time, dt)
        half = _advance(state, dt / 2, config, stats, depth + 1)
        return _advance(half, state.time + dt - half.time, config, stats, depth + 1)


def evolve(u0: ScalarField, config: EvolutionConfig) -> Trajectory:
    """Integrate from ``t_start`` to ``t_end``, recording the requested output times."""
    if u0.grid != config.grid:
        raise InvalidArgument("initial field and config use different grids")
    state = ConformalFlowState(u0, config.t_start)
    states = []
    stats = {}
    t_now = config.t_start
    for target in config.output_times:
        if target == config.t_start:
            states.append(state)
            continue
        n_steps = max(1, math.ceil((target - t_now) / config.dt - 1e-9))
        for k in range(1, n_steps + 1):
            t_next = target if k == n_steps else t_now + k * config.dt
            nxt = _advance(state, t_next - state.time, config, stats)
            # land exactly on the scheduled time
            state = ConformalFlowState(nxt.field, t_next)
        t_now = target
        states.append(state)
    return Trajectory(tuple(states), config, stats.get("newton", 0))


def boundary_contact(state: ConformalFlowState, background: float, threshold: float = 1e-4) -> bool:
    """True once the disturbance has reached the outer 10% of nodes on either side."""
    n = state.grid.n
    k = max(1, n // 10)
    outer = np.concatenate([state.u[:k], state.u[-k:]])
    return bool(np.max(np.abs(outer - background)) > threshold)


def mass_excess(state: ConformalFlowState, background: float) -> float:
    return float(trapezoid(state.u - background, dx=state.grid.h))
