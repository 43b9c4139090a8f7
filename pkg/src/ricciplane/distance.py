"""Geodesic distance and area for y-independent conformal metrics on a 2D window.

Distances are shortest paths in a lattice graph whose edges carry the
Riemannian length of the straight segment (Euclidean length times the root of
the mean conformal factor at the two ends). The 16-neighbour stencil
overestimates flat distances by at most 1/cos(atan(1/2)/2) ~ 2.8%.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import BallTruncated, DomainError, InvalidArgument
from .flow_state import ConformalFlowState, gauss_curvature_1d, require_positive
from .grid_fd import make_uniform_grid

Point = tuple


def stencil_offsets(order: int):
    """Half of the neighbour offsets (one from each +- pair) for 8 (order 1) or 16 (order 2) neighbours."""
    if order not in (1, 2):
        raise InvalidArgument(f"stencil_order must be 1 or 2, got {order}")
    offs = []
    for dx in range(0, order + 1):
        for dy in range(-order, order + 1):
            if (dx, dy) == (0, 0) or (dx == 0 and dy < 0):
                continue
            if math.gcd(dx, abs(dy)) == 1:
                offs.append((dx, dy))
    return offs


def stencil_overestimate(order: int) -> float:
    """Worst-case ratio of flat lattice distance to Euclidean distance."""
    angles = sorted({math.atan2(dy, dx) % math.pi for dx, dy in stencil_offsets(order)})
    gaps = np.diff(angles + [angles[0] + math.pi])
    return 1.0 / math.cos(max(gaps) / 2)


@dataclass(frozen=True)
class PathMetricGraph:
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray  # shape (len(y), len(x))
    stencil_order: int = 2
    matrix: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        require_positive(self.u)
        if self.matrix is None:
            object.__setattr__(self, "matrix", self._build())

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def shape(self):
        return self.u.shape

    def _build(self):
        ny, nx = self.u.shape
        idx = np.arange(nx * ny).reshape(ny, nx)
        rows, cols, w = [], [], []
        for dx, dy in stencil_offsets(self.stencil_order):
            ys = slice(max(0, -dy), ny - max(0, dy))
            yt = slice(max(0, dy), ny - max(0, -dy))
            xs = slice(0, nx - dx)
            xt = slice(dx, nx)
            a, b = self.u[ys, xs], self.u[yt, xt]
            length = self.h * math.hypot(dx, dy)
            rows.append(idx[ys, xs].ravel())
            cols.append(idx[yt, xt].ravel())
            w.append((length * np.sqrt(0.5 * (a + b))).ravel())
        m = coo_matrix((np.concatenate(w), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(nx * ny, nx * ny))
        return m.tocsr()

    def node(self, p: Point) -> int:
        px, py = p
        h = self.h
        if not (self.x[0] - 1e-9 * h <= px <= self.x[-1] + 1e-9 * h
                and self.y[0] - 1e-9 * h <= py <= self.y[-1] + 1e-9 * h):
            raise DomainError(f"point {p} lies outside the graph window")
        ix = int(round((px - self.x[0]) / h))
        iy = int(round((py - self.y[0]) / h))
        return iy * len(self.x) + ix

    def coords(self, node: int) -> Point:
        iy, ix = divmod(int(node), len(self.x))
        return float(self.x[ix]), float(self.y[iy])

    def distances_from(self, sources: Sequence[int]) -> np.ndarray:
        d = dijkstra(self.matrix, directed=False, indices=np.asarray(sources, dtype=int))
        if not np.all(np.isfinite(d)):
            raise DomainError("graph is disconnected")
        return d


def build_graph(state: ConformalFlowState, window, h: float | None = None,
                stencil_order: int = 2) -> PathMetricGraph:
    """Extrude the 1D factor of ``state`` over ``window = (x0, x1, y0, y1)``.

    ``h`` defaults to the state's grid spacing. When the window nodes do not
    coincide with state nodes the factor is linearly interpolated.
    """
    x0, x1, y0, y1 = window
    g = state.grid
    if x0 < g.x_min - 1e-12 or x1 > g.x_max + 1e-12:
        raise DomainError(f"window x-range [{x0}, {x1}] exceeds the state grid")
    h = g.h if h is None else float(h)
    nx = int(round((x1 - x0) / h)) + 1
    ny = int(round((y1 - y0) / h)) + 1
    x = x0 + np.arange(nx) * h
    y = y0 + np.arange(ny) * h
    ux = np.interp(x, g.nodes, state.u)
    return PathMetricGraph(x, y, np.broadcast_to(ux, (ny, nx)).copy(), stencil_order)


def flat_graph(window, h: float, factor: float = 1.0, stencil_order: int = 2) -> PathMetricGraph:
    x0, x1, y0, y1 = window
    x = x0 + np.arange(int(round((x1 - x0) / h)) + 1) * h
    y = y0 + np.arange(int(round((y1 - y0) / h)) + 1) * h
    return PathMetricGraph(x, y, np.full((len(y), len(x)), float(factor)), stencil_order)


def grid_distance(graph: PathMetricGraph, p, q) -> float:
    """Shortest-path distance between two nodes (indices or coordinates).

    The search always starts from the lower node index, so d(p, q) and
    d(q, p) are the same floating-point computation.
    """
    a = p if isinstance(p, (int, np.integer)) else graph.node(p)
    b = q if isinstance(q, (int, np.integer)) else graph.node(q)
    if a == b:
        return 0.0
    a, b = min(a, b), max(a, b)
    return float(graph.distances_from([a])[0, b])


def straight_line_length(state: ConformalFlowState, x1: float, x2: float) -> float:
    """Length of the horizontal segment between (x1, y) and (x2, y): integral of sqrt(u)."""
    g = state.grid
    lo, hi = min(x1, x2), max(x1, x2)
    if lo < g.x_min - 1e-12 or hi > g.x_max + 1e-12:
        raise DomainError(f"[{lo}, {hi}] is outside [{g.x_min}, {g.x_max}]")
    if hi == lo:
        return 0.0
    i, j = (lo - g.x_min) / g.h, (hi - g.x_min) / g.h
    if abs(i - round(i)) < 1e-9 and abs(j - round(j)) < 1e-9 and round(j) - round(i) >= 2:
        s = np.sqrt(state.u[int(round(i)):int(round(j)) + 1])
        return float(simpson(s, dx=g.h))
    # off-node endpoints: spline the factor and integrate on a refined mesh
    spline = CubicSpline(g.nodes, state.u)
    m = 2 * max(2, math.ceil(4 * (hi - lo) / g.h))
    xs = np.linspace(lo, hi, m + 1)
    return float(simpson(np.sqrt(np.maximum(spline(xs), 0.0)), x=xs))


def euclidean(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


class AttainmentRow(NamedTuple):
    time: float
    sup_deviation: float
    sup_relative_deviation: float
    max_K: float


def random_pairs(n: int, box=(-1.0, 1.0, -1.0, 1.0), seed: int = 0, h: float | None = None):
    """Seeded uniform point pairs in ``box``, optionally snapped to a lattice of spacing h."""
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1 = box
    pts = np.column_stack([rng.uniform(x0, x1, 2 * n), rng.uniform(y0, y1, 2 * n)])
    if h is not None:
        pts = np.round(pts / h) * h
    return [(tuple(map(float, pts[2 * i])), tuple(map(float, pts[2 * i + 1]))) for i in range(n)]


def _check_margin(pairs, window):
    x0, x1, y0, y1 = window
    mx, my = 0.1 * (x1 - x0), 0.1 * (y1 - y0)
    for pair in pairs:
        for px, py in pair:
            if not (x0 + mx - 1e-12 <= px <= x1 - mx + 1e-12 and y0 + my - 1e-12 <= py <= y1 - my + 1e-12):
                raise DomainError(f"point {(px, py)} is within the 10% margin of window {window}")


def pair_distances(graph: PathMetricGraph, pairs) -> np.ndarray:
    nodes = [(graph.node(p), graph.node(q)) for p, q in pairs]
    sources = sorted({a for a, _ in nodes})
    d = graph.distances_from(sources)
    row = {s: k for k, s in enumerate(sources)}
    return np.array([d[row[a], b] for a, b in nodes])


def attainment_report(traj, pairs, d0: Callable = euclidean, window=None,
                      h: float | None = None, stencil_order: int = 2):
    """Per output time: sup over pairs of |d_g(t) - d0| and the max interior K.

    Pair endpoints are snapped to the graph lattice before ``d0`` is evaluated.
    """
    if window is None:
        pts = np.array([p for pair in pairs for p in pair])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.25 * (hi - lo).max()
        window = (lo[0] - pad, hi[0] + pad, lo[1] - pad, hi[1] + pad)
    _check_margin(pairs, window)
    rows = []
    for state in traj:
        graph = build_graph(state, window, h, stencil_order)
        snapped = [(graph.coords(graph.node(p)), graph.coords(graph.node(q))) for p, q in pairs]
        d = pair_distances(graph, snapped)
        ref = np.array([d0(p, q) for p, q in snapped])
        dev = np.abs(d - ref)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(ref > 0, dev / ref, 0.0)
        kmax = float(np.max(gauss_curvature_1d(state).interior))
        rows.append(AttainmentRow(state.time, float(dev.max()), float(rel.max()), kmax))
    return rows


def volume_ratio(state_or_graph, p, r: float, h: float | None = None,
                 stencil_order: int = 2) -> float:
    """Area of the metric ball B(p, r) divided by pi r^2 (flat metrics give 1).

    Given a graph, the ball must fit inside it. Given a state, a square window
    around ``p`` is grown until the ball no longer touches its boundary.
    """
    if not r > 0:
        raise InvalidArgument("radius must be positive")
    if isinstance(state_or_graph, PathMetricGraph):
        return _ball_ratio(state_or_graph, p, r)
    state = state_or_graph
    g = state.grid
    h = r / 50 if h is None else h
    half = 1.5 * r / math.sqrt(float(np.interp(p[0], g.nodes, state.u)))
    while True:
        x0, x1 = max(g.x_min, p[0] - half), min(g.x_max, p[0] + half)
        x0 = p[0] - h * math.floor((p[0] - x0) / h)
        x1 = p[0] + h * math.floor((x1 - p[0]) / h)
        window = (x0, x1, p[1] - h * round(half / h), p[1] + h * round(half / h))
        graph = build_graph(state, window, h, stencil_order)
        try:
            return _ball_ratio(graph, p, r)
        except BallTruncated:
            if x0 <= g.x_min + h and x1 >= g.x_max - h:
                raise
            half *= 2


def _ball_ratio(graph: PathMetricGraph, p, r: float) -> float:
    d = graph.distances_from([graph.node(p)])[0].reshape(graph.shape)
    inside = d <= r
    edge = np.concatenate([inside[0], inside[-1], inside[:, 0], inside[:, -1]])
    if edge.any():
        raise BallTruncated(f"metric ball of radius {r} touches the window boundary")
    area = float(np.sum(graph.u[inside])) * graph.h ** 2
    return area / (math.pi * r * r)
