"""Uniform grids and second-order finite-difference stencils."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise InvalidArgument(f"grid needs n >= 3 nodes, got {self.n}")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_min >= self.x_max:
            raise InvalidArgument(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        # multiplication, not accumulation, so node i is exactly x_min + i*h
        return self.x_min + np.arange(self.n) * self.h

    def index_of(self, x: float) -> int:
        """Index of the node closest to ``x``."""
        return int(np.clip(round((x - self.x_min) / self.h), 0, self.n - 1))


@dataclass(frozen=True)
class ScalarField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise InvalidArgument(
                f"field has {values.shape} values for a grid of {self.grid.n} nodes")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, f) -> "ScalarField":
        return cls(grid, f(grid.nodes))

    def __len__(self):
        return self.grid.n


def make_uniform_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n))


def d1(values: np.ndarray, h: float) -> np.ndarray:
    """Central first difference; second-order one-sided at the two ends."""
    f = np.asarray(values, dtype=float)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    out[0] = (4 * (f[1] - f[0]) - (f[2] - f[0])) / (2 * h)
    out[-1] = (4 * (f[-1] - f[-2]) - (f[-1] - f[-3])) / (2 * h)
    return out


def d2(values: np.ndarray, h: float) -> np.ndarray:
    """Three-point second difference. End entries copy their interior neighbour."""
    f = np.asarray(values, dtype=float)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h)
    out[0] = out[1]
    out[-1] = out[-2]
    return out


def first_derivative(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, d1(f.values, f.grid.h))


def second_derivative(f: ScalarField) -> ScalarField:
    """Second derivative by the three-point stencil.

    The two endpoint values are sentinel copies of the neighbouring interior
    value and must not be used in any bound check.
    """
    return ScalarField(f.grid, d2(f.values, f.grid.h))


def interior_slice(n: int, margin: int = 2) -> slice:
    """Nodes at distance >= margin*h from both ends."""
    return slice(margin, n - margin)
