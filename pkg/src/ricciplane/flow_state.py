"""Conformal metrics u(dx^2 + dy^2) and their Gauss curvature."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, PositivityError
from .grid_fd import Grid1D, ScalarField, d2, interior_slice


def require_positive(u, what="conformal factor"):
    u = np.asarray(u, dtype=float)
    if not np.all(u > 0):
        bad = int(np.argmin(u))
        raise PositivityError(f"{what} must be positive; found {u.flat[bad]!r} at index {bad}")
    return u


@dataclass(frozen=True)
class ConformalFlowState:
    field: ScalarField
    time: float

    def __post_init__(self):
        require_positive(self.field.values)
        if not np.isfinite(self.time) or self.time < 0:
            raise InvalidArgument(f"time must be finite and non-negative, got {self.time}")

    @classmethod
    def from_values(cls, grid: Grid1D, u, time: float) -> "ConformalFlowState":
        require_positive(u)
        return cls(ScalarField(grid, u), float(time))

    @property
    def grid(self) -> Grid1D:
        return self.field.grid

    @property
    def u(self) -> np.ndarray:
        return self.field.values


@dataclass(frozen=True)
class CurvatureField:
    field: ScalarField
    time: float

    @property
    def interior(self) -> np.ndarray:
        """Values at nodes at least 2h from the boundary (what reports quantify over)."""
        return self.field.values[interior_slice(self.field.grid.n)]


def gauss_curvature_values(u: np.ndarray, h: float) -> np.ndarray:
    u = require_positive(u)
    return -d2(np.log(u), h) / (2 * u)


def gauss_curvature_1d(state: ConformalFlowState) -> CurvatureField:
    """K = -(log u)_xx / (2u) for a y-independent factor."""
    k = gauss_curvature_values(state.u, state.grid.h)
    return CurvatureField(ScalarField(state.grid, k), state.time)


def gauss_curvature_2d(u: np.ndarray, gx: Grid1D, gy: Grid1D) -> np.ndarray:
    """K = -(Δ log u) / (2u) with the 5-point Laplacian.

    ``u`` has shape ``(gy.n, gx.n)``. Boundary rows and columns are NaN.
    """
    u = require_positive(u)
    if u.shape != (gy.n, gx.n):
        raise InvalidArgument(f"u has shape {u.shape}, grids imply {(gy.n, gx.n)}")
    v = np.log(u)
    lap_x = (v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]) / (gx.h * gx.h)
    lap_y = (v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / (gy.h * gy.h)
    k = np.full(u.shape, np.nan)
    k[1:-1, 1:-1] = -(lap_x + lap_y) / (2 * u[1:-1, 1:-1])
    return k
