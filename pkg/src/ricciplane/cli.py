"""Command-line frontend.

Exit codes: 0 success with all checks passing, 1 a bound or invariant check
failed (reports are still written), 2 input or configuration error,
3 numerical failure (Newton breakdown, loss of positivity).
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import io
from .config import ConfigError, ExperimentConfig, defaults_text, load_config
from .distance import attainment_report, random_pairs, volume_ratio
from .errors import (BallTruncated, DomainError, InsufficientStates, InvalidArgument,
                     NewtonFailure, PositivityError, TensorInputError, UnderResolved)
from .evolve import (EvolutionConfig, MeasureInitialData, boundary_contact, evolve,
                     mass_excess, mollify_initial_data)
from .grid_fd import ScalarField, make_uniform_grid
from .pic1 import min_ic1, read_tensor, ricci
from .pressure import (check_curvature_bounds, check_curvature_identity, check_q_bound,
                       check_q_evolution, compute_pressure, q_evolution_scale, window_tolerance)
from .soliton import pde_residual, soliton_fields, soliton_u

log = logging.getLogger("ricciplane")

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# shared experiment plumbing

def initial_field(cfg: ExperimentConfig, grid):
    d = cfg.initial_data
    if d.kind == "measure":
        return mollify_initial_data(
            MeasureInitialData(d.background, d.line_mass, d.mollifier_width, d.mollifier_kind), grid)
    if d.kind == "soliton":
        return ScalarField(grid, soliton_u(grid.nodes, cfg.evolution.t_start))
    if d.kind == "constant":
        if not d.value > 0:
            raise ConfigError("initial_data.value must be positive")
        return ScalarField(grid, np.full(grid.n, float(d.value)))
    raise ConfigError(f"unknown initial_data.kind {d.kind!r}")


def evolution_config(cfg: ExperimentConfig) -> EvolutionConfig:
    g = cfg.grid
    ev = cfg.evolution
    return EvolutionConfig(
        grid=make_uniform_grid(g.x_min, g.x_max, g.n), t_start=ev.t_start, t_end=ev.t_end,
        dt=ev.dt, boundary_mode=ev.boundary_mode, farfield_value=ev.farfield_value,
        newton_tol=ev.newton_tol, newton_max_iter=ev.newton_max_iter,
        output_times=cfg.output_times())


def check_window(cfg: ExperimentConfig):
    """(t_origin, window_start): bounds are checked where t - t_origin >= window_start."""
    c = cfg.checks
    kind = cfg.initial_data.kind
    t_origin = c.t_origin if c.t_origin is not None else (0.0 if kind == "soliton" else cfg.evolution.t_start)
    if c.window_start is not None:
        start = c.window_start
    elif kind == "measure":
        start = cfg.initial_data.mollifier_width ** 2
    else:
        start = 0.0
    return t_origin, start


def bound_reports(states, t_origin, window_start, tol_scale=0.05, alpha=1.0, background=None):
    """Run the q and curvature bound checks on every state inside the window."""
    reports = []
    for s in states:
        elapsed = s.time - t_origin
        if elapsed <= 0 or elapsed < window_start:
            continue
        if background is not None and boundary_contact(s, background):
            log.warning("boundary contact at t=%g; later states are not bound-checked", s.time)
            break
        tol = window_tolerance(s.time, t_origin, tol_scale)
        reports.append(check_q_bound(compute_pressure(s), alpha, tol, t_origin))
        reports.extend(check_curvature_bounds(s, tol, t_origin))
    return reports


def run_experiment(cfg: ExperimentConfig):
    ec = evolution_config(cfg)
    u0 = initial_field(cfg, ec.grid)
    traj = evolve(u0, ec)
    return traj


# --------------------------------------------------------------------------
# subcommands

def cmd_soliton(args):
    if not args.t > 0:
        raise InvalidArgument("--t must be positive")
    grid = make_uniform_grid(-args.xmax, args.xmax, args.n)
    f = soliton_fields(grid, args.t)
    lines = ["x,u,K,w,q\n"]
    for row in zip(grid.nodes, f.u.values, f.K.values, f.w.values, f.q.values):
        lines.append(",".join(io.fmt(v) for v in row) + "\n")
    _emit("".join(lines), args.out)
    h = min(1e-4, args.t / 10)
    res = [pde_residual(args.t, float(x), h) for x in grid.nodes]
    summary = {"t": args.t, "xmax": args.xmax, "n": args.n, "residual_step": h,
               "max_pde_residual": max(res), "max_2tK": float(np.max(2 * args.t * f.K.values)),
               "q_times_t": float(np.max(np.abs(f.q.values * args.t)))}
    if args.summary:
        io.write_json(summary, args.summary)
    else:
        sys.stderr.write(io.dumps(summary))
    return EXIT_OK


def cmd_evolve(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    started = time.perf_counter()
    traj = run_experiment(cfg)
    log.info("evolve: %d states, %d Newton iterations, %.2fs", len(traj),
             traj.newton_iterations, time.perf_counter() - started)
    t_origin, start = check_window(cfg)
    background = cfg.initial_data.background if (
        cfg.evolution.boundary_mode == "constant_farfield" and cfg.initial_data.kind == "measure") else None
    reports = bound_reports(traj.states, t_origin, start, cfg.checks.tol_scale, cfg.checks.alpha, background)
    passed = all(r.passed for r in reports)
    summary = {
        "config": cfg.as_dict(),
        "states": [{"t": s.time, "max_u": float(s.u.max()), "min_u": float(s.u.min()),
                    "mass_excess": mass_excess(s, cfg.initial_data.background)} for s in traj],
        "window": {"t_origin": t_origin, "window_start": start},
        "checks": [r.as_dict() for r in reports],
        "all_passed": passed,
    }
    if cfg.output.trajectory:
        io.write_trajectory(traj.states, cfg.output.trajectory)
    text = io.dumps(summary)
    _emit(text, cfg.output.summary)
    return EXIT_OK if passed else EXIT_CHECK


def cmd_diagnose(args):
    states = io.read_trajectory(args.traj)
    reports = bound_reports(states, args.t_origin, args.window_start, args.tol_scale, args.alpha)
    identity = {io.fmt(s.time): check_curvature_identity(s) for s in states}
    w_u = max(float(np.max(np.abs(compute_pressure(s).w.values * s.u - 1))) for s in states)
    summary = {
        "trajectory": str(args.traj),
        "window": {"t_origin": args.t_origin, "window_start": args.window_start,
                   "tol_scale": args.tol_scale, "alpha": args.alpha},
        "checks": [r.as_dict() for r in reports],
        "curvature_identity_residual": identity,
        "reciprocal_defect": w_u,
    }
    try:
        summary["q_evolution_residual"] = check_q_evolution(states)
        summary["q_evolution_scale"] = q_evolution_scale(states)
    except InsufficientStates:
        summary["q_evolution_residual"] = None
    passed = all(r.passed for r in reports)
    summary["all_passed"] = passed
    _emit(io.dumps(summary), args.out)
    return EXIT_OK if passed else EXIT_CHECK


def cmd_distance(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    dc = cfg.distance
    traj = run_experiment(cfg)
    states = [s for s in traj if s.time > 0]
    pairs = random_pairs(dc.n_pairs, tuple(dc.pair_box), seed=cfg.seed, h=dc.h)
    rows = attainment_report(states, pairs, window=tuple(dc.window), h=dc.h,
                             stencil_order=dc.stencil_order)
    vol_rows = []
    for s in states:
        for r in dc.volume_radii:
            vol_rows.append((s.time, float(r), volume_ratio(s, tuple(dc.volume_center), float(r),
                                                            h=float(r) / 50, stencil_order=dc.stencil_order)))
    dist_header = ("t", "sup_deviation", "sup_relative_deviation", "max_K")
    if cfg.output.distance_table:
        io.write_table(cfg.output.distance_table, dist_header, [tuple(map(float, r)) for r in rows])
    if cfg.output.volume_table:
        io.write_table(cfg.output.volume_table, ("t", "r", "volume_ratio"), vol_rows)
    summary = {"config": cfg.as_dict(),
               "attainment": [r._asdict() for r in rows],
               "volume_ratio": [{"t": t, "r": r, "ratio": v} for t, r, v in vol_rows]}
    _emit(io.dumps(summary), cfg.output.summary)
    return EXIT_OK


def cmd_pic1(args):
    R = read_tensor(args.input)
    res = min_ic1(R, samples=args.samples, refine_iters=args.refine_iters, seed=args.seed,
                  restarts=args.restarts)
    passed = res.value >= -args.tol
    doc = {
        "dimension": R.n,
        "symmetry_defects": R.symmetry_defects(),
        "ricci_eigenvalues": np.linalg.eigvalsh(ricci(R)).tolist(),
        "min_ic1": res.value,
        "min_ic1_general_planes": res.general_value,
        "min_ic1_frame_family": res.frame_value,
        "wpic1": passed,
        "tol": args.tol,
        "witness": res.witness.as_dict(),
        "samples": args.samples,
        "seed": args.seed,
    }
    _emit(io.dumps(doc), args.out)
    return EXIT_OK if passed else EXIT_CHECK


# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="ricciplane",
        description="Translation-invariant Ricci flow on the plane and K_IC1 curvature checks.",
        epilog="exit codes: 0 ok, 1 check failed, 2 input/config error, 3 numerical failure",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("soliton", help="tabulate the explicit expanding soliton")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--xmax", type=float, default=5.0)
    s.add_argument("--n", type=int, default=401)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.add_argument("--summary", help="JSON residual summary path (default stderr)")
    s.set_defaults(func=cmd_soliton)

    for name, func, helptext in (("evolve", cmd_evolve, "run the solver from a JSON config"),
                                 ("distance", cmd_distance, "distance attainment and volume ratios")):
        e = sub.add_parser(name, help=helptext, epilog=defaults_text(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        e.add_argument("--config", required=True)
        e.add_argument("--seed", type=int, default=None, help="override the config seed")
        e.set_defaults(func=func)

    d = sub.add_parser("diagnose", help="pressure and curvature checks on a trajectory CSV")
    d.add_argument("--traj", required=True)
    d.add_argument("--t-origin", type=float, default=0.0,
                   help="time the bounds are measured from (default 0)")
    d.add_argument("--window-start", type=float, default=0.0,
                   help="only check states with t - t_origin >= this (default 0)")
    d.add_argument("--tol-scale", type=float, default=0.05,
                   help="tolerance is tol_scale / (t - t_origin) (default 0.05)")
    d.add_argument("--alpha", type=float, default=1.0)
    d.add_argument("--out", help="JSON report path (default stdout)")
    d.set_defaults(func=cmd_diagnose)

    c = sub.add_parser("pic1", help="min K_IC1 and WPIC1 verdict for a curvature tensor")
    c.add_argument("--input", required=True, help='JSON {"dimension": n, "components": [[i,j,k,l,v], ...]}')
    c.add_argument("--samples", type=int, default=2000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--refine-iters", type=int, default=10)
    c.add_argument("--restarts", type=int, default=6)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--out", help="JSON report path (default stdout)")
    c.set_defaults(func=cmd_pic1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (NewtonFailure, PositivityError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (ConfigError, InvalidArgument, UnderResolved, TensorInputError, DomainError,
            BallTruncated, InsufficientStates, OSError, TypeError, ValueError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
