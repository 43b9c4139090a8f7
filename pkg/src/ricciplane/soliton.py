"""The explicit expanding soliton u = 2t / (t^2 + x^2) and its derived fields.

Every field here is a hand-differentiated closed form so that the solver and
the diagnostics can be compared against something free of truncation error.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import InvalidArgument
from .grid_fd import Grid1D, ScalarField


def _check_time(t):
    if not np.all(np.asarray(t) > 0):
        raise InvalidArgument(f"soliton is defined for t > 0 only, got t={t}")


def soliton_u(x, t):
    _check_time(t)
    return 2 * t / (t * t + np.square(x))


def soliton_log_u_x(x, t):
    _check_time(t)
    return -2 * x / (t * t + np.square(x))


def soliton_K(x, t):
    _check_time(t)
    x2 = np.square(x)
    return (t * t - x2) / (2 * t * (t * t + x2))


def soliton_w(x, t):
    _check_time(t)
    return (t * t + np.square(x)) / (2 * t)


def soliton_q(x, t):
    _check_time(t)
    return np.full(np.shape(x), 1.0 / t) if np.ndim(x) else 1.0 / t


class SolitonFields(NamedTuple):
    u: ScalarField
    K: ScalarField
    w: ScalarField
    q: ScalarField


def soliton_fields(grid: Grid1D, t: float) -> SolitonFields:
    x = grid.nodes
    return SolitonFields(
        u=ScalarField(grid, soliton_u(x, t)),
        K=ScalarField(grid, soliton_K(x, t)),
        w=ScalarField(grid, soliton_w(x, t)),
        q=ScalarField(grid, soliton_q(x, t)),
    )


def pde_residual(t: float, x: float, h: float) -> float:
    """|u_t - (log u)_xx| on the closed form, both by central differences of step h."""
    if not (0 < h < t):
        raise InvalidArgument(f"need 0 < h < t, got h={h}, t={t}")
    u_t = (soliton_u(x, t + h) - soliton_u(x, t - h)) / (2 * h)
    lu = np.log(soliton_u(np.array([x - h, x, x + h]), t))
    lu_xx = (lu[2] - 2 * lu[1] + lu[0]) / (h * h)
    return float(abs(u_t - lu_xx))


def soliton_mass(R: float, t: float, n: int = 200001) -> float:
    """Trapezoidal integral of u over [-R, R]; tends to 2*pi as R grows."""
    x = np.linspace(-R, R, n)
    return float(trapezoid(soliton_u(x, t), x))


def soliton_axis_length(x1: float, x2: float, t: float) -> float:
    """Exact length of the horizontal segment from (x1, 0) to (x2, 0)."""
    _check_time(t)
    return float(np.sqrt(2 * t) * (np.arcsinh(x2 / t) - np.arcsinh(x1 / t)))
