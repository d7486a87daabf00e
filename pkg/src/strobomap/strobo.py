"""The time-T return map: evaluation, spike-count partition, discontinuity
location, lateral values, normal-form gap offsets and branch fixed points."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from scipy.optimize import brentq

from .errors import BoundaryAbsent, NoSpikeRegime
from .flows import (TIE_TOL, _time_of_flight_quad, autonomous_flow, engine_for,
                    flow_autonomous)
from .models import Family, SystemParams, VectorFieldSpec

FP_STEP_TOL = 1e-12
FP_RESIDUAL_TOL = 1e-10
FP_MAX_ITER = 10_000
BOUNDARY_TOL = 1e-9
SIGMA_XTOL = 1e-13  # comfortably below the advertised 1e-11


@dataclass(frozen=True)
class StroboResult:
    """One time-T evaluation: image in [0, theta) and the spikes on the way."""

    x_T: float
    spikes: int
    spike_times: tuple[float, ...]


@dataclass(frozen=True)
class GapOffsets:
    """Discontinuity data at the boundary with index n.

    mu_l = s_minus - sigma and mu_r = sigma - s_plus are the normal-form
    offsets; both positive means the parameter point sits inside an adding
    window."""

    n: int
    sigma: float
    s_minus: float
    s_plus: float
    mu_l: float
    mu_r: float


@dataclass(frozen=True)
class FixedPoint:
    x_bar: float
    branch_n: int
    multiplier: float


def strobo_map(system: SystemParams, x0: float) -> StroboResult:
    """Image of x0 under the time-T map, with per-window spike bookkeeping."""
    theta = system.theta
    if not 0.0 <= x0 < theta:
        raise ValueError(f"x0 must lie in [0, theta), got {x0}")
    x_T, spikes = engine_for(system).window(x0)
    if x_T >= theta:
        x_T = math.nextafter(theta, 0.0)
    return StroboResult(x_T=x_T, spikes=len(spikes), spike_times=tuple(spikes))


def spike_count(system: SystemParams, x0: float) -> int:
    """Index n of the partition set containing x0."""
    return strobo_map(system, x0).spikes


def _delta_of(system: SystemParams) -> Optional[float]:
    return engine_for(system).delta


def sigma_boundary(system: SystemParams, n: int) -> Optional[float]:
    """Initial condition whose n-th spike lands exactly on the switch time.

    Solves phi(d*T - (n-1)*delta; sigma; A) = theta through the spike-chain
    time equation.  None when the boundary falls outside [0, theta)."""
    if n < 1:
        raise ValueError("boundary index must be >= 1")
    d, T = system.forcing.d, system.forcing.T
    if d == 0.0:
        raise ValueError("sigma_boundary requires d > 0")
    field, theta, A = system.field, system.theta, system.forcing.A

    if field.family is Family.LINEAR:
        delta = _delta_of(system)
        if delta is None:
            raise NoSpikeRegime("trajectory from the reset value never spikes")
        t_n = d * T - (n - 1) * delta
        if t_n <= 0.0 or t_n > delta:
            return None
        a, b = field.coefficients
        xe = -(b + A) / a
        return float(xe + (theta - xe) * math.exp(-a * t_n))

    # nonlinear: quadrature time-of-flight, matching the integral form of the
    # chain equation
    if float(field.f(theta)) + A <= 0.0:
        raise NoSpikeRegime("trajectory from the reset value never spikes")
    delta = _time_of_flight_quad(field, A, 0.0, theta)
    t_n = d * T - (n - 1) * delta
    if t_n <= 0.0 or t_n > delta:
        return None
    if t_n == delta:
        return 0.0

    def residual(x):
        return _time_of_flight_quad(field, A, x, theta) - t_n

    return float(brentq(residual, 0.0, theta, xtol=SIGMA_XTOL))


@lru_cache(maxsize=4096)
def _lateral_cached(field: VectorFieldSpec, theta: float,
                    t_off: float) -> tuple[float, float]:
    if t_off == 0.0:
        return theta, 0.0
    if field.family is Family.LINEAR:
        flow = autonomous_flow(field, 0.0, theta)
        return flow.flow(theta, t_off), flow.flow(0.0, t_off)
    return (flow_autonomous(field, 0.0, theta, t_off, method="numeric"),
            flow_autonomous(field, 0.0, 0.0, t_off, method="numeric"))


def lateral_values(system: SystemParams) -> tuple[float, float]:
    """(s_minus, s_plus): off-phase images of theta and 0 over T*(1-d).

    These are the lateral limits of the map at any boundary; they depend on
    neither the amplitude nor the boundary index."""
    t_off = system.forcing.T * (1.0 - system.forcing.d)
    return _lateral_cached(system.field, system.theta, t_off)


def gap_offsets(system: SystemParams, n: int) -> GapOffsets:
    """Boundary location plus the normal-form offsets at branch index n."""
    try:
        sigma = sigma_boundary(system, n)
    except NoSpikeRegime as exc:
        raise BoundaryAbsent(str(exc)) from exc
    if sigma is None:
        raise BoundaryAbsent(
            f"boundary {n} not in [0, theta) at A={system.forcing.A}")
    s_minus, s_plus = lateral_values(system)
    return GapOffsets(n=n, sigma=sigma, s_minus=s_minus, s_plus=s_plus,
                      mu_l=s_minus - sigma, mu_r=sigma - s_plus)


def _near_boundary(system: SystemParams, x: float, n: int,
                   tol: float) -> bool:
    for k in (n, n + 1):
        if k < 1:
            continue
        try:
            s = sigma_boundary(system, k)
        except NoSpikeRegime:
            return False
        if s is not None and abs(x - s) <= tol:
            return True
    return False


def _map_multiplier(system: SystemParams, x: float, n: int) -> float:
    """Central finite-difference slope of the map, kept inside branch n."""
    engine = engine_for(system)
    theta = system.theta
    h = 1e-6
    for _ in range(24):
        lo = max(x - h, 0.0)
        hi = min(x + h, math.nextafter(theta, 0.0))
        if hi <= lo:
            h *= 0.5
            continue
        y_lo, sp_lo = engine.window(lo)
        y_hi, sp_hi = engine.window(hi)
        if len(sp_lo) == n and len(sp_hi) == n:
            return (y_hi - y_lo) / (hi - lo)
        h *= 0.25
    return math.nan


def _cycle_detected(history: list[float], tol: float = 1e-12,
                    max_period: int = 64) -> bool:
    if len(history) < 2 * max_period + 2:
        return False
    tail = history[-(2 * max_period + 2):]
    last = tail[-1]
    for p in range(2, max_period + 1):
        if abs(last - tail[-1 - p]) <= tol and abs(tail[-2] - tail[-2 - p]) <= tol:
            return True
    return False


def fixed_point(system: SystemParams) -> Optional[FixedPoint]:
    """Unique fixed point of the map, when one exists.

    Iterates from three seeds until the step drops below 1e-12 (at most 1e4
    iterations), accepts only if the limit and its image share a spike count
    and the residual is below 1e-10, and reports None both for genuine cycles
    of period >= 2 and for limits within 1e-9 of a boundary (border-collision
    candidates)."""
    engine = engine_for(system)
    theta = system.theta
    seeds = (0.0, 0.5 * theta, theta - 1e-9)
    for seed in seeds:
        x = seed
        history: list[float] = []
        converged = False
        for i in range(FP_MAX_ITER):
            x_next, _ = engine.window(x)
            x_next = min(x_next, math.nextafter(theta, 0.0))
            if abs(x_next - x) <= FP_STEP_TOL:
                x = x_next
                converged = True
                break
            x = x_next
            history.append(x)
            if i % 128 == 127 and _cycle_detected(history):
                return None
            if len(history) > 256:
                del history[:-160]
        if not converged:
            continue
        result_x, spikes = engine.window(x)
        n = len(spikes)
        if abs(result_x - x) > FP_RESIDUAL_TOL:
            continue
        n_image = len(engine.window(min(result_x, math.nextafter(theta, 0.0)))[1])
        if n_image != n:
            continue
        if _near_boundary(system, x, n, BOUNDARY_TOL):
            # border-collision candidate, not a fixed point; other seeds may
            # still settle away from the boundary (d = 1 degeneracy)
            continue
        return FixedPoint(x_bar=x, branch_n=n,
                          multiplier=_map_multiplier(system, x, n))
    return None
