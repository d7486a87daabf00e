"""Border-collision bifurcation curves and parameter-space drivers.

Curves are roots in the amplitude of the boundary conditions sigma_k = s_-,
sigma_k = s_+ or sigma_k = 0.  The boundary is monotone decreasing in the
amplitude while the lateral values do not depend on it, so plain bisection is
exact enough and unconditionally convergent.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from multiprocessing import get_context
from typing import Callable, Optional, Sequence, Union

from .errors import NoRoot, OrderingViolation
from .flows import _time_of_flight_quad
from .models import Family, SystemParams
from .strobo import lateral_values, sigma_boundary
from .symbolic import Aperiodic, DegenerateBoundary, detect_orbit, encode

A_TOL = 1e-10          # bisection tolerance in the amplitude
A_MAX_DEFAULT = 1e6    # search ceiling before declaring NoRoot
A0_TREND_DUTIES = (0.3, 0.2, 0.1, 0.05)  # proxy grid for the d -> 0 blow-up
DEFAULT_PERIOD_CAP = 20


class CurveTag(str, Enum):
    A0 = "A0"    # left collision of the non-spiking fixed point
    AnL = "AnL"  # left collision of the branch-n fixed point
    AnR = "AnR"  # right collision (birth) of the branch-n fixed point
    AnC = "AnC"  # boundary n reaches 0; the map turns continuous


@dataclass(frozen=True)
class CurveKind:
    tag: CurveTag
    n: int = 0

    def __post_init__(self):
        tag = CurveTag(self.tag)
        object.__setattr__(self, "tag", tag)
        if tag is CurveTag.A0 and self.n != 0:
            raise ValueError("A0 is the n = 0 left curve")
        if tag is not CurveTag.A0 and self.n < 1:
            raise ValueError(f"{tag.value} requires n >= 1")

    @property
    def boundary_index(self) -> int:
        """Index of the boundary whose collision the curve expresses."""
        if self.tag in (CurveTag.A0, CurveTag.AnL):
            return self.n + 1
        return self.n

    def label(self) -> str:
        return "A0" if self.tag is CurveTag.A0 else f"{self.tag.value[:2]}{self.n}{self.tag.value[2]}"


def _delta_amp(system: SystemParams, A: float) -> Optional[float]:
    """Inter-spike time at amplitude A (closed form or quadrature)."""
    field, theta = system.field, system.theta
    if float(field.f(theta)) + A <= 0.0:
        return None
    if field.family is Family.LINEAR:
        a, b = field.coefficients
        xe = -(b + A) / a
        return math.log((xe - 0.0) / (xe - theta)) / (-a)
    return _time_of_flight_quad(field, A, 0.0, theta)


def amplitude_for_delta(system: SystemParams, target: float,
                        a_max: float = A_MAX_DEFAULT) -> float:
    """Amplitude at which the inter-spike time equals ``target``."""
    field, theta = system.field, system.theta
    if field.family is Family.LINEAR:
        a, b = field.coefficients
        big = math.exp(-a * target)
        xe = theta * big / (big - 1.0)
        return -b - a * xe
    a_min = -float(field.f(theta))
    lo = a_min
    hi = max(1.0, 2.0 * abs(a_min) + 1.0)
    while True:
        d = _delta_amp(system, hi)
        if d is not None and d < target:
            break
        hi *= 2.0
        if hi > a_max:
            raise NoRoot(f"inter-spike time {target} not reached below A = {a_max}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d = _delta_amp(system, mid)
        if d is None or d > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= A_TOL * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def solve_curve(template: SystemParams, kind: CurveKind, d: float,
                a_max: float = A_MAX_DEFAULT) -> float:
    """Amplitude on the requested collision curve at duty cycle d."""
    if not 0.0 < d < 1.0:
        raise ValueError(f"d must lie in (0, 1), got {d}")
    system = template.with_forcing(d=d)
    T = system.forcing.T
    field, theta = system.field, system.theta

    if kind.tag is CurveTag.AnC:
        return amplitude_for_delta(system, d * T / kind.n, a_max)

    s_minus, s_plus = lateral_values(system)
    target = s_minus if kind.tag in (CurveTag.A0, CurveTag.AnL) else s_plus
    k = kind.boundary_index

    if k == 1:
        a_lo = -float(field.f(theta))  # spiking threshold; sigma_1 -> theta
    else:
        a_lo = amplitude_for_delta(system, d * T / (k - 1), a_max)
    a_hi = amplitude_for_delta(system, d * T / k, a_max)
    if not a_hi > a_lo:
        raise NoRoot(f"empty existence range for boundary {k} at d = {d}")

    def boundary_minus_target(A: float) -> float:
        dl = _delta_amp(system, A)
        if dl is None:
            return theta - target  # below the spiking threshold: above target
        t_n = d * T - (k - 1) * dl
        if t_n <= 0.0:
            return theta - target
        if t_n > dl:
            return -target  # boundary already left through 0
        sigma = sigma_boundary(system.with_forcing(A=A), k)
        if sigma is None:
            return -target
        return sigma - target

    lo, hi = a_lo, a_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if boundary_minus_target(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= A_TOL * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def verify_ordering(template: SystemParams, d: float, n_max: int,
                    check_limit_trend: bool = True
                    ) -> list[tuple[CurveKind, float]]:
    """Solve A0 < A1R < A1L < ... up to n_max and assert strict ordering.

    Also asserts the blow-up proxy: A0 grows monotonically along a fixed
    sequence of shrinking duty cycles."""
    kinds = [CurveKind(CurveTag.A0, 0)]
    for n in range(1, n_max + 1):
        kinds.append(CurveKind(CurveTag.AnR, n))
        kinds.append(CurveKind(CurveTag.AnL, n))
    values = [(kind, solve_curve(template, kind, d)) for kind in kinds]
    for (ka, va), (kb, vb) in zip(values, values[1:]):
        if not va < vb:
            raise OrderingViolation(
                f"{ka.label()}(d={d}) = {va} not below {kb.label()} = {vb}")
    if check_limit_trend:
        a0 = [solve_curve(template, CurveKind(CurveTag.A0, 0), dd)
              for dd in A0_TREND_DUTIES]
        for (da, va), (db, vb) in zip(zip(A0_TREND_DUTIES, a0),
                                      zip(A0_TREND_DUTIES[1:], a0[1:])):
            if not vb > va:
                raise OrderingViolation(
                    f"A0 did not grow from d={da} ({va}) to d={db} ({vb})")
    return values


# ---------------------------------------------------------------------------
# scan and sweep containers


@dataclass(frozen=True)
class ScanPoint:
    lam: float
    d: float
    invA: float
    status: str  # "ok" | "aperiodic" | "degenerate" | "error: ..."
    period: Optional[int] = None
    branch_n: Optional[int] = None
    spikes_total: Optional[int] = None
    eta: Optional[Fraction] = None
    word: Optional[str] = None


@dataclass(frozen=True)
class ScanSeries:
    points: tuple[ScanPoint, ...]
    window_span: bool = False

    @property
    def base_branch(self) -> Optional[int]:
        branches = [p.branch_n for p in self.points if p.status == "ok"]
        return min(branches) if branches else None


@dataclass(frozen=True)
class SweepCell:
    d: float
    invA: float
    status: str
    period: Optional[int] = None
    branch_n: Optional[int] = None
    rho: Optional[Fraction] = None
    eta: Optional[Fraction] = None
    word_hash: Optional[str] = None


@dataclass(frozen=True)
class SweepGrid:
    d_axis: tuple[float, ...]
    invA_axis: tuple[float, ...]
    cells: tuple[SweepCell, ...]  # d-major: index = i_d * len(invA_axis) + i_invA

    def cell(self, i_d: int, i_invA: int) -> SweepCell:
        return self.cells[i_d * len(self.invA_axis) + i_invA]


def _word_hash(word: str) -> str:
    return hashlib.sha1(word.encode()).hexdigest()[:8]


def _classify(template: SystemParams, d: float, invA: float, burn_in: int,
              max_period: int, tol: float) -> dict:
    """Run orbit detection in one cell; never raises."""
    try:
        system = template.with_forcing(A=1.0 / invA, d=d)
        found = detect_orbit(system, 0.0, burn_in=burn_in,
                             max_period=max_period, tol=tol)
        if isinstance(found, Aperiodic):
            return {"status": "aperiodic"}
        out = {
            "status": "ok",
            "period": found.period,
            "branch_n": found.branch_n,
            "spikes_total": found.total_spikes,
            "eta": Fraction(found.total_spikes, found.period),
        }
        try:
            out["word"] = encode(found, system).word
        except DegenerateBoundary:
            out["status"] = "degenerate"
        return out
    except Exception as exc:  # per-cell failures must not abort the sweep
        return {"status": f"error: {type(exc).__name__}: {exc}"}


def _eval_scan_chunk(args):
    template, items, burn_in, max_period, tol = args
    return [_classify(template, d, invA, burn_in, max_period, tol)
            for (d, invA) in items]


def _run_chunks(template, chunks, burn_in, max_period, tol, workers):
    args = [(template, chunk, burn_in, max_period, tol) for chunk in chunks]
    if workers == 1 or len(chunks) <= 1:
        return [_eval_scan_chunk(a) for a in args]
    with get_context("fork").Pool(processes=workers) as pool:
        return pool.map(_eval_scan_chunk, args)


def _resolve_workers(workers: Optional[int]) -> int:
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def scan_1d(template: SystemParams,
            curve: Callable[[float], tuple[float, float]],
            steps: int,
            lam_lo: float = 0.0, lam_hi: float = 1.0,
            burn_in: int = 500, max_period: int = 64, tol: float = 1e-9,
            workers: int = 1, window_span: bool = False) -> ScanSeries:
    """Orbit classification along a parameter path lambda -> (d, 1/A).

    The path must have strictly decreasing 1/A (checked on the sampled
    points); each point records period, window-relative word, branch and the
    exact firing number.  ``lam_lo``/``lam_hi`` restrict the scan to a
    subinterval while keeping the reported lambda values in the path's own
    coordinates (refinement scans stay comparable to their parent)."""
    if steps <= 0:
        return ScanSeries(points=(), window_span=window_span)
    span = lam_hi - lam_lo
    lams = [lam_lo + span * (i / (steps - 1)) if steps > 1 else lam_lo
            for i in range(steps)]
    path = [curve(l) for l in lams]
    inv_as = [invA for (_d, invA) in path]
    for a, b in zip(inv_as, inv_as[1:]):
        if not b < a:
            raise ValueError("1/A must decrease strictly along the scan path")

    workers = _resolve_workers(workers)
    n_chunks = min(len(path), 8 * workers) or 1
    bounds = [round(i * len(path) / n_chunks) for i in range(n_chunks + 1)]
    chunks = [path[a:b] for a, b in zip(bounds, bounds[1:]) if b > a]
    results = _run_chunks(template, chunks, burn_in, max_period, tol, workers)
    flat = [cell for chunk in results for cell in chunk]

    base = min((c["branch_n"] for c in flat if c["status"] == "ok"), default=None)
    points = []
    for lam, (d, invA), cell in zip(lams, path, flat):
        word = cell.get("word")
        if cell.get("period") == 1 and base is not None:
            word = "L" if cell["branch_n"] == base else "R"
        points.append(ScanPoint(
            lam=lam, d=d, invA=invA, status=cell["status"],
            period=cell.get("period"), branch_n=cell.get("branch_n"),
            spikes_total=cell.get("spikes_total"), eta=cell.get("eta"),
            word=word))
    return ScanSeries(points=tuple(points), window_span=window_span)


def window_path(template: SystemParams, n: int, d: float
                ) -> Callable[[float], tuple[float, float]]:
    """Straight segment across the adding window between the branch-n left
    curve and the branch-(n+1) right curve at fixed duty cycle.

    The endpoints are nudged just onto the fixed-point side of each collision
    (well below the scan resolution) so the bounding plateaus realize the
    colliding fixed points, with rotation numbers exactly 0 and 1."""
    left = CurveKind(CurveTag.A0, 0) if n == 0 else CurveKind(CurveTag.AnL, n)
    a_left = solve_curve(template, left, d)
    a_right = solve_curve(template, CurveKind(CurveTag.AnR, n + 1), d)
    eps_l = 100.0 * A_TOL * max(1.0, a_left)
    eps_r = 100.0 * A_TOL * max(1.0, a_right)
    b0, b1 = 1.0 / (a_left - eps_l), 1.0 / (a_right + eps_r)

    def path(lam: float) -> tuple[float, float]:
        return d, b0 + lam * (b1 - b0)

    return path


def sweep_2d(template: SystemParams,
             d_range: tuple[float, float],
             invA_range: tuple[float, float],
             resolution: Union[int, tuple[int, int]],
             period_cap: int = DEFAULT_PERIOD_CAP,
             burn_in: int = 500, tol: float = 1e-9,
             workers: int = 1) -> SweepGrid:
    """Orbit classification over a (d, 1/A) grid.

    Cells are independent; per-cell failures are recorded in the cell status
    and never abort the sweep.  The result is identical for any worker
    count."""
    nd, ninv = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nd < 1 or ninv < 1:
        raise ValueError("resolution must be positive")
    d_axis = [d_range[0] + (d_range[1] - d_range[0]) * (i / max(1, nd - 1))
              for i in range(nd)]
    invA_axis = [invA_range[0] + (invA_range[1] - invA_range[0]) * (j / max(1, ninv - 1))
                 for j in range(ninv)]
    for axis, name in ((d_axis, "d"), (invA_axis, "1/A")):
        if any(not b > a for a, b in zip(axis, axis[1:])):
            raise ValueError(f"{name} axis must be strictly increasing")

    # chunk by 1/A so each worker reuses one driven-flow table per chunk
    chunks = [[(d, invA) for d in d_axis] for invA in invA_axis]
    workers = _resolve_workers(workers)
    results = _run_chunks(template, chunks, burn_in, period_cap, tol, workers)

    cells: list[Optional[SweepCell]] = [None] * (nd * ninv)
    for j, (invA, row) in enumerate(zip(invA_axis, results)):
        for i, (d, cell) in enumerate(zip(d_axis, row)):
            eta = cell.get("eta")
            branch = cell.get("branch_n")
            rho = (eta - branch) if eta is not None else None
            word = cell.get("word")
            cells[i * ninv + j] = SweepCell(
                d=d, invA=invA, status=cell["status"],
                period=cell.get("period"), branch_n=branch, rho=rho, eta=eta,
                word_hash=_word_hash(word) if word else None)
    return SweepGrid(d_axis=tuple(d_axis), invA_axis=tuple(invA_axis),
                     cells=tuple(cells))
