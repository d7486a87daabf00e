"""Command-line front end.

Subcommands map, orbit, curves, sweep, staircase and farey read one JSON
config, run the corresponding analysis and emit a plot-ready table.  Output
is CSV (a single '#' comment line carries the config hash) or one JSON
document with "metadata" and "rows".  Payload bytes depend only on the
config.  Exit codes: 0 success (aperiodic findings included), 2 config
error, 3 numerical failure, 4 property violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from typing import Optional

from . import __version__
from .bifurcation import (CurveKind, CurveTag, ScanSeries, scan_1d,
                          solve_curve, sweep_2d, window_path)
from .config import Config
from .errors import (AddingViolation, BoundaryAbsent, ConfigError,
                     DegenerateBoundary, IntegrationFailure,
                     MonotonicityViolation, NoEquilibrium, NoRoot,
                     NoSpikeRegime, OrderingViolation)
from .flows import hybrid_flow
from .models import SystemParams
from .strobo import lateral_values, sigma_boundary, strobo_map
from .symbolic import (Aperiodic, adding_check, detect_orbit, encode,
                       farey_tree, orbit_stats, staircase)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_PROPERTY = 4


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _frac_cols(value: Optional[Fraction]) -> tuple:
    if value is None:
        return "", ""
    return value.numerator, value.denominator


def _emit(columns, rows, config: Config, out, fmt: str, wall_time: float):
    if fmt == "csv":
        out.write(f"# config={config.digest()} strobomap={__version__}\n")
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
    else:
        doc = {
            "metadata": {
                "config": config.raw,
                "config_hash": config.digest(),
                "strobomap": __version__,
                "python": sys.version.split()[0],
                "wall_time_s": wall_time,
            },
            "columns": list(columns),
            "rows": [[(v if not isinstance(v, float) else v) for v in row]
                     for row in rows],
        }
        json.dump(doc, out, default=_fmt)
        out.write("\n")


# ---------------------------------------------------------------------------
# subcommands: each returns (columns, rows)


def cmd_map(config: Config):
    system = config.validated_system()
    job = config.job("map")
    points = int(job.get("points", 1000))
    theta = system.theta
    rows = []
    for i in range(points):
        x = theta * i / points
        res = strobo_map(system, x)
        rows.append(("grid", x, res.x_T, res.spikes))
    delta = None
    try:
        from .flows import engine_for
        delta = engine_for(system).delta
    except IntegrationFailure:
        pass
    if delta is not None:
        d, T = system.forcing.d, system.forcing.T
        if d > 0.0:
            n_star = math.ceil(d * T / delta)
            sigma = sigma_boundary(system, n_star) if n_star >= 1 else None
            if sigma is not None:
                s_minus, s_plus = lateral_values(system)
                rows.append(("sigma", sigma, strobo_map(system, sigma).x_T, n_star))
                rows.append(("s_minus", sigma, s_minus, ""))
                rows.append(("s_plus", sigma, s_plus, ""))
    return ("kind", "x", "s_of_x", "spikes"), rows


def cmd_orbit(config: Config):
    system = config.validated_system()
    job = config.job("orbit")
    num = config.numerics
    x0 = float(job.get("x0", 0.0))
    found = detect_orbit(system, x0, burn_in=int(num["burn_in"]),
                         max_period=int(num["max_period"]), tol=num["fp_tol"] * 10)
    columns = ("table", "i", "t", "x", "spikes", "period", "word",
               "rho_num", "rho_den", "eta_num", "eta_den", "rate", "status")
    rows = []
    if isinstance(found, Aperiodic):
        rows.append(("summary", "", "", "", "", "", "", "", "", "", "", "",
                     "aperiodic"))
        return columns, rows
    status = "ok"
    word = ""
    rho = eta = None
    rate = ""
    try:
        seq = encode(found, system)
        stats = orbit_stats(found, seq, system.forcing.T)
        word, rho, eta, rate = seq.word, stats.rho, stats.eta, stats.rate
    except DegenerateBoundary:
        status = "degenerate"
    rows.append(("summary", "", "", "", found.total_spikes, found.period,
                 word, *_frac_cols(rho), *_frac_cols(eta), rate, status))
    for i, (x, s) in enumerate(zip(found.points, found.per_point_spikes)):
        rows.append(("point", i, "", x, s, "", "", "", "", "", "", "", ""))
    horizon = found.period * system.forcing.T
    samples_pp = int(job.get("samples_per_period", 64))
    traj = hybrid_flow(system, found.points[0], horizon,
                       sample_dt=system.forcing.T / samples_pp)
    for t, x in traj.samples:
        rows.append(("trajectory", "", t, x, "", "", "", "", "", "", "", "", ""))
    return columns, rows


def cmd_curves(config: Config):
    system = config.validated_system()
    job = config.job("curves")
    n_max = int(job.get("n_max", 3))
    d_min = float(job.get("d_min", 0.05))
    d_max = float(job.get("d_max", 0.95))
    points = int(job.get("points", 50))
    kinds = [CurveKind(CurveTag.A0, 0)]
    for n in range(1, n_max + 1):
        kinds.extend((CurveKind(CurveTag.AnR, n), CurveKind(CurveTag.AnL, n),
                      CurveKind(CurveTag.AnC, n)))
    columns = ["d"]
    for kind in kinds:
        columns.extend((kind.label(), f"inv{kind.label()}"))
    rows = []
    for i in range(points):
        d = d_min + (d_max - d_min) * (i / max(1, points - 1))
        row = [d]
        for kind in kinds:
            try:
                a = solve_curve(system, kind, d)
                row.extend((a, 1.0 / a))
            except NoRoot:
                row.extend(("", ""))
        rows.append(tuple(row))
    return tuple(columns), rows


def cmd_sweep(config: Config, workers: Optional[int]):
    system = config.validated_system()
    job = config.job("sweep")
    num = config.numerics
    d_range = tuple(job.get("d_range", (0.02, 0.98)))
    invA_range = tuple(job.get("invA_range", (0.02, 2.0)))
    resolution = job.get("resolution", 150)
    if isinstance(resolution, list):
        resolution = tuple(int(r) for r in resolution)
    else:
        resolution = int(resolution)
    grid = sweep_2d(system, d_range, invA_range, resolution,
                    period_cap=int(job.get("period_cap", 20)),
                    burn_in=int(num["burn_in"]), workers=workers or 1)
    columns = ("d", "invA", "period", "n", "rho_num", "rho_den",
               "eta_num", "eta_den", "status", "word_hash")
    rows = []
    for cell in grid.cells:
        rows.append((cell.d, cell.invA, cell.period, cell.branch_n,
                     *_frac_cols(cell.rho), *_frac_cols(cell.eta),
                     cell.status, cell.word_hash or ""))
    return columns, rows


def _staircase_series(config: Config, workers: Optional[int]):
    system = config.validated_system()
    job = config.job("staircase")
    num = config.numerics
    steps = int(job.get("steps", 2001))
    kwargs = dict(burn_in=int(num["burn_in"]),
                  max_period=int(num["max_period"]), workers=workers or 1)
    if "segment" in job:
        seg = job["segment"]
        d0, b0 = float(seg["d0"]), float(seg["invA0"])
        d1, b1 = float(seg["d1"]), float(seg["invA1"])

        def path(lam):
            return d0 + lam * (d1 - d0), b0 + lam * (b1 - b0)

        window_span = bool(seg.get("window_span", False))
    else:
        n = int(job.get("window", 0))
        d = float(job.get("d", system.forcing.d))
        path = window_path(system, n, d)
        window_span = True
    series = scan_1d(system, path, steps, window_span=window_span, **kwargs)
    return system, job, path, series, kwargs


def cmd_staircase(config: Config, workers: Optional[int]):
    system, job, path, series, kwargs = _staircase_series(config, workers)
    if series.points:
        staircase(series)  # monotonicity + endpoint validation
        depth = int(job.get("adding_depth", 3))
        if depth > 0:
            def refine(la, lb, steps):
                return scan_1d(system, path, steps, lam_lo=la, lam_hi=lb,
                               **kwargs)
            adding_check(series, refine, depth=depth,
                         max_detect_period=kwargs["max_period"])
    base = series.base_branch
    columns = ("lambda", "d", "invA", "rho_num", "rho_den", "eta_num",
               "eta_den", "period", "word", "status")
    rows = []
    for p in series.points:
        rho = (p.eta - base) if (p.eta is not None and base is not None) else None
        rows.append((p.lam, p.d, p.invA, *_frac_cols(rho), *_frac_cols(p.eta),
                     p.period, p.word or "", p.status))
    return columns, rows


def cmd_farey(config: Config):
    depth = int(config.job("farey").get("depth", 4))
    tree = farey_tree(depth)
    columns = ("depth", "word", "rho_num", "rho_den", "parent_left",
               "parent_right")
    rows = []
    for node in tree.nodes():
        rows.append((node.depth, node.word, node.rho.numerator,
                     node.rho.denominator,
                     node.parent_left.word if node.parent_left else "",
                     node.parent_right.word if node.parent_right else ""))
    return columns, rows


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strobomap",
        description="Stroboscopic-map analysis of pulse-driven "
                    "integrate-and-fire systems")
    parser.add_argument("command", choices=("map", "orbit", "curves", "sweep",
                                            "staircase", "farey"))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override a config leaf along a dotted path")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel workers for sweeps/scans "
                             "(default: all cores)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def run(args) -> int:
    config = Config.from_file(args.config).override(args.overrides)
    workers = args.workers if args.workers is not None else config.workers
    start = time.perf_counter()
    if args.command == "map":
        columns, rows = cmd_map(config)
    elif args.command == "orbit":
        columns, rows = cmd_orbit(config)
    elif args.command == "curves":
        columns, rows = cmd_curves(config)
    elif args.command == "sweep":
        columns, rows = cmd_sweep(config, workers)
    elif args.command == "staircase":
        columns, rows = cmd_staircase(config, workers)
    else:
        columns, rows = cmd_farey(config)
    wall = time.perf_counter() - start
    if args.out:
        with open(args.out, "w") as fh:
            _emit(columns, rows, config, fh, args.format, wall)
    else:
        _emit(columns, rows, config, sys.stdout, args.format, wall)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, NoEquilibrium) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationFailure, NoRoot, NoSpikeRegime, BoundaryAbsent) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except (OrderingViolation, MonotonicityViolation, AddingViolation) as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return EXIT_PROPERTY


if __name__ == "__main__":
    sys.exit(main())
