"""Trajectory CSV and JSON summary serialization."""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import InvalidArgument
from .flow_state import ConformalFlowState, gauss_curvature_values
from .grid_fd import d2, make_uniform_grid

HEADER = ("t", "x", "u", "K", "w", "q")


def fmt(v: float) -> str:
    return "%.17g" % v


def state_rows(state: ConformalFlowState):
    """(t, x, u, K, w, q) rows; K and q are blank-valued ('nan') at the two end nodes."""
    x = state.grid.nodes
    u = state.u
    k = gauss_curvature_values(u, state.grid.h)
    w = 1.0 / u
    q = d2(w, state.grid.h)
    k[[0, -1]] = np.nan
    q[[0, -1]] = np.nan
    for row in zip(x, u, k, w, q):
        yield (state.time,) + row


def write_trajectory(states, path):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(HEADER) + "\n")
        for s in states:
            for row in state_rows(s):
                fh.write(",".join(fmt(v) for v in row) + "\n")


def read_trajectory(path):
    """States rebuilt from the (t, x, u) columns; the derived columns are ignored."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise InvalidArgument(f"{path}: expected header {','.join(HEADER)}")
        by_time = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t, x, u = float(row[0]), float(row[1]), float(row[2])
            except (ValueError, IndexError) as exc:
                raise InvalidArgument(f"{path}:{lineno}: {exc}") from exc
            by_time.setdefault(t, ([], []))
            by_time[t][0].append(x)
            by_time[t][1].append(u)
    if not by_time:
        raise InvalidArgument(f"{path}: no data rows")
    states = []
    grid = None
    for t in sorted(by_time):
        xs, us = map(np.array, by_time[t])
        order = np.argsort(xs, kind="stable")
        xs, us = xs[order], us[order]
        g = make_uniform_grid(xs[0], xs[-1], len(xs))
        if np.max(np.abs(g.nodes - xs)) > 1e-9 * max(1.0, abs(g.x_max - g.x_min)):
            raise InvalidArgument(f"{path}: nodes at t={t} are not uniformly spaced")
        if grid is not None and g != grid:
            raise InvalidArgument(f"{path}: grid changes between times")
        grid = g
        states.append(ConformalFlowState.from_values(g, us, t))
    return states


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(doc) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def write_json(doc, path):
    with open(path, "w") as fh:
        fh.write(dumps(doc))


def write_table(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
