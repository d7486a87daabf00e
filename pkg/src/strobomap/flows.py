"""Flow evaluation for the autonomous phases and the hybrid flow with resets.

Two evaluation routes coexist.  The public operations ``flow_autonomous`` and
``spike_time_delta`` use the closed form for the linear family and an
adaptive embedded Runge-Kutta integrator (with event localization) otherwise.
The hot loops (stroboscopic iteration, sweeps, scans) go through per-(field,
amplitude) flow tables: cumulative Gauss-Legendre time-of-flight on an
adaptive state grid, interpolated by cubic Hermite splines whose slopes are
the exact field values.  The two routes are cross-validated in the test
suite; tables self-check against a fixed-step integrator at build time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import IntegrationFailure
from .models import Family, SystemParams, VectorFieldSpec

# Absolute time tolerance for a spike landing exactly on a phase switch.
TIE_TOL = 1e-12

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


# ---------------------------------------------------------------------------
# closed-form route (linear family)


class AffineFlow:
    """Closed-form flow of x' = a*x + (b + A)."""

    def __init__(self, a: float, b: float, A: float, theta: float):
        self.a, self.c, self.theta = a, b + A, theta
        self.equilibrium = -(b + A) / a if a != 0.0 else None
        self.delta = self.time_to_threshold(0.0)

    def flow(self, x0: float, t: float) -> float:
        if t <= 0.0:
            return x0
        if self.a == 0.0:
            return x0 + self.c * t
        xe = self.equilibrium
        return xe + (x0 - xe) * math.exp(self.a * t)

    def time_to_threshold(self, x0: float) -> Optional[float]:
        theta = self.theta
        if x0 >= theta:
            return 0.0
        if self.a == 0.0:
            return (theta - x0) / self.c if self.c > 0.0 else None
        xe = self.equilibrium
        if xe <= theta:  # forced equilibrium blocks the threshold
            return None
        return math.log((xe - x0) / (xe - theta)) / (-self.a)


# ---------------------------------------------------------------------------
# table route (general smooth families)


class _WarpSegment:
    """One monotone piece of an autonomous orbit, tabulated as t(u) and u(t).

    ``u`` increases along the motion (u = x on upward pieces, u = -x on
    downward ones).  Slopes of both Hermite splines are exact: du/dt is the
    field speed and dt/du its reciprocal.  Past the table end the segment
    optionally continues with the linearized decay onto its equilibrium.
    """

    def __init__(self, speed_of, u: np.ndarray,
                 equilibrium_u: Optional[float] = None,
                 lam: Optional[float] = None):
        u = np.asarray(u, dtype=float)
        speed = np.asarray(speed_of(u), dtype=float)
        if np.any(speed <= 0.0):
            raise IntegrationFailure("flow table span contains a speed sign change")
        mid = 0.5 * (u[1:] + u[:-1])
        half = 0.5 * np.diff(u)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        slowness = 1.0 / np.asarray(speed_of(pts), dtype=float)
        seg_times = (slowness @ _GL_WEIGHTS) * half
        t = np.concatenate(([0.0], np.cumsum(seg_times)))
        self.u_lo, self.u_hi = float(u[0]), float(u[-1])
        self.t_end = float(t[-1])
        self._pos = CubicHermiteSpline(t, u, speed)
        self._time = CubicHermiteSpline(u, t, 1.0 / speed)
        self.equilibrium_u = equilibrium_u
        self.lam = lam

    def time_at(self, u: float) -> float:
        if u <= self.u_lo:
            return 0.0
        if u >= self.u_hi:
            if self.equilibrium_u is None:
                return self.t_end
            gap = self.equilibrium_u - u
            gap_end = self.equilibrium_u - self.u_hi
            if gap <= 0.0:
                return math.inf
            return self.t_end + math.log(gap / gap_end) / self.lam
        return float(self._time(u))

    def pos_at(self, t: float) -> float:
        if t <= 0.0:
            return self.u_lo
        if t >= self.t_end:
            if self.equilibrium_u is None:
                if t <= self.t_end * (1.0 + 1e-12) + 1e-15:
                    return self.u_hi
                raise IntegrationFailure("flow queried past the threshold crossing")
            gap_end = self.equilibrium_u - self.u_hi
            return self.equilibrium_u - gap_end * math.exp(self.lam * (t - self.t_end))
        return float(self._pos(t))


def _equidistributed_grid(weight_of, lo: float, hi: float, n: int) -> np.ndarray:
    """Place n points on [lo, hi] with local density proportional to weight."""
    probe = np.linspace(lo, hi, 4 * n + 1)
    w = np.asarray(weight_of(probe), dtype=float)
    w = np.clip(w, w[np.isfinite(w)].max() * 1e-4 if np.isfinite(w).any() else 1.0, None)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(probe))))
    cdf /= cdf[-1]
    levels = np.linspace(0.0, 1.0, n)
    return np.interp(levels, cdf, probe)


def _segment_grid(field: VectorFieldSpec, g_of, lo: float, hi: float,
                  base_n: int = 4096) -> np.ndarray:
    """Grid for a monotone span: uniform base plus refinement where the field
    bends (large |f'|) or the motion is slow (small |g|)."""

    def weight(xs):
        slope = np.abs(field.fprime(xs))
        speed = np.abs(g_of(xs))
        speed = np.maximum(speed, np.max(speed) * 1e-6 + 1e-300)
        s_ref = np.mean(slope) + 1e-300
        return 1.0 + np.minimum(slope / s_ref, 1e3) + np.minimum(
            np.max(speed) / speed, 1e3)

    uniform = np.linspace(lo, hi, base_n + 1)
    refined = _equidistributed_grid(weight, lo, hi, base_n)
    grid = np.union1d(uniform, refined)
    return grid


def _tail_grid(start: float, equilibrium: float, span: float) -> np.ndarray:
    """Geometric approach from |start - equilibrium| down to ~1e-9 * span."""
    d0 = abs(equilibrium - start)
    d_min = max(1e-9 * max(span, 1e-6), 1e-14)
    if d0 <= d_min:
        return np.asarray([start])
    n = max(8, int(math.ceil(math.log(d0 / d_min) / math.log(1.0 / 0.985))))
    dists = d0 * (0.985 ** np.arange(n + 1))
    sign = 1.0 if equilibrium > start else -1.0
    return equilibrium - sign * dists


class WarpFlow:
    """Tabulated flow of x' = f(x) + A on [0, theta] for a smooth field."""

    def __init__(self, field: VectorFieldSpec, A: float, theta: float):
        self.field, self.A, self.theta = field, A, theta
        g_scalar = lambda x: float(field.f(x)) + A
        g_vec = lambda xs: np.asarray(field.f(xs), dtype=float) + A
        if g_scalar(0.0) <= 0.0:
            raise IntegrationFailure(
                "field pushes the reset state downward; system outside the "
                "supported class (f(0) + A must be positive)")
        self.equilibrium: Optional[float] = None
        self.delta: Optional[float] = None
        if g_scalar(theta) > 0.0:
            u = _segment_grid(field, g_vec, 0.0, theta)
            self._seg_up = _WarpSegment(g_vec, u)
            self._seg_dn = None
            self.delta = self._seg_up.t_end
        else:
            xe = float(brentq(g_scalar, 0.0, theta, xtol=1e-15))
            lam = float(field.fprime(xe))
            if lam >= 0.0:
                raise IntegrationFailure("driven equilibrium is not attracting")
            self.equilibrium = xe
            eps = 0.05 * max(xe, 1e-9)
            body = _segment_grid(field, g_vec, 0.0, max(xe - eps, 0.0))
            u_up = np.union1d(body, _tail_grid(max(xe - eps, 0.0), xe, xe))
            u_up = u_up[u_up < xe]
            self._seg_up = _WarpSegment(g_vec, u_up, equilibrium_u=xe, lam=lam)
            if theta - xe > 1e-12:
                eps = 0.05 * (theta - xe)
                body = _segment_grid(field, lambda xs: -g_vec(xs),
                                     xe + eps, theta)
                u_dn = np.union1d(-body[::-1], _tail_grid(-(xe + eps), -xe,
                                                          theta - xe))
                u_dn = np.unique(u_dn[u_dn < -xe])
                speed_dn = lambda us: -g_vec(-np.asarray(us))
                self._seg_dn = _WarpSegment(speed_dn, u_dn,
                                            equilibrium_u=-xe, lam=lam)
            else:
                self._seg_dn = None
        self._self_check(g_vec)

    def flow(self, x0: float, t: float) -> float:
        if t <= 0.0:
            return x0
        xe = self.equilibrium
        if xe is None:
            seg = self._seg_up
            return seg.pos_at(seg.time_at(x0) + t)
        if x0 == xe:
            return xe
        if x0 < xe:
            seg = self._seg_up
            return seg.pos_at(seg.time_at(x0) + t)
        if self._seg_dn is None:
            return x0  # equilibrium pinned at theta
        seg = self._seg_dn
        return -seg.pos_at(seg.time_at(-x0) + t)

    def time_to_threshold(self, x0: float) -> Optional[float]:
        if self.delta is None:
            return None
        if x0 >= self.theta:
            return 0.0
        return max(0.0, self.delta - self._seg_up.time_at(x0))

    def _self_check(self, g_vec, tol: float = 1e-7):
        """Compare a few table evaluations against fixed-step RK4."""
        if self.equilibrium is None:
            probes = [(0.0, 0.45 * self.delta), (0.3 * self.theta, 0.3 * self.delta)]
        else:
            probes = [(0.0, 1.0), (self.theta, 1.0), (0.5 * self.theta, 3.0)]
        for x0, t in probes:
            table = self.flow(x0, t)
            direct = _rk4(g_vec, x0, t, 4096)
            if not math.isfinite(table) or abs(table - direct) > tol:
                raise IntegrationFailure(
                    f"flow table self-check failed at x0={x0}, t={t}: "
                    f"table={table!r}, rk4={direct!r}")


def _rk4(g_vec, x0: float, t: float, steps: int) -> float:
    h = t / steps
    x = float(x0)
    g = lambda v: float(g_vec(np.asarray([v]))[0])
    for _ in range(steps):
        k1 = g(x)
        k2 = g(x + 0.5 * h * k1)
        k3 = g(x + 0.5 * h * k2)
        k4 = g(x + h * k3)
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


@lru_cache(maxsize=4096)
def _affine_flow(a: float, b: float, A: float, theta: float) -> AffineFlow:
    return AffineFlow(a, b, A, theta)


@lru_cache(maxsize=32)
def _warp_flow(field: VectorFieldSpec, A: float, theta: float) -> WarpFlow:
    return WarpFlow(field, A, theta)


def autonomous_flow(field: VectorFieldSpec, A: float, theta: float):
    """Cached flow object for x' = f(x) + A restricted to [0, theta]."""
    if field.family is Family.LINEAR:
        a, b = field.coefficients
        return _affine_flow(a, b, A, theta)
    return _warp_flow(field, A, theta)


# ---------------------------------------------------------------------------
# public flow operations


def flow_autonomous(field: VectorFieldSpec, A: float, x0: float, t: float,
                    rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                    method: str = "auto") -> float:
    """phi(t; x0; A) with no threshold handling.

    method "auto" takes the closed form for the linear family and DOP853
    otherwise; "numeric" forces the integrator (used to cross-check the
    closed form); "closed_form" is linear-only.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return float(x0)
    closed = field.family is Family.LINEAR
    if method == "closed_form" or (method == "auto" and closed):
        if not closed:
            raise ValueError("closed form available for the linear family only")
        a, b = field.coefficients
        c = b + A
        if a == 0.0:
            return float(x0 + c * t)
        xe = -c / a
        return float(xe + (x0 - xe) * math.exp(a * t))
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    rhs = lambda _t, y: field.f(y) + A
    sol = solve_ivp(rhs, (0.0, t), [float(x0)], method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(f"integration failed: {sol.message}")
    return float(sol.y[0, -1])


def _time_of_flight_quad(field: VectorFieldSpec, A: float, x_from: float,
                         x_to: float) -> float:
    """Integral of dx / (f(x) + A); valid while f + A keeps one sign."""
    val, _err = quad(lambda x: 1.0 / (float(field.f(x)) + A), x_from, x_to,
                     epsabs=1e-13, epsrel=1e-12, limit=300)
    return float(val)


def spike_time_delta(field: VectorFieldSpec, A: float, theta: float,
                     rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                     event_tol: float = TIE_TOL) -> Optional[float]:
    """Smallest time for the flow from 0 under f + A to reach theta.

    None when f + A vanishes somewhere on [0, theta] (the trajectory stalls
    below the threshold).  Nonlinear families are integrated forward with the
    crossing localized by root finding on the integrator's dense output; the
    achieved localization is tighter than ``event_tol``.
    """
    xs = np.linspace(0.0, theta, 257)
    if float(np.min(np.asarray(field.f(xs), dtype=float) + A)) <= 0.0:
        return None
    if field.family is Family.LINEAR:
        a, b = field.coefficients
        return AffineFlow(a, b, A, theta).time_to_threshold(0.0)
    t_cap = 1.5 * _time_of_flight_quad(field, A, 0.0, theta) + 1.0

    def hit(_t, y):
        return y[0] - theta

    hit.terminal = True
    hit.direction = 1.0
    sol = solve_ivp(lambda _t, y: field.f(y) + A, (0.0, t_cap), [0.0],
                    method="DOP853", rtol=rtol, atol=atol, events=hit)
    if not sol.success:
        raise IntegrationFailure(f"integration failed: {sol.message}")
    if sol.t_events[0].size == 0:
        raise IntegrationFailure("threshold crossing not located below time cap")
    return float(sol.t_events[0][0])


# ---------------------------------------------------------------------------
# hybrid flow (reset at theta, square-wave switching)


@dataclass(frozen=True)
class HybridTrajectory:
    """Sampled hybrid solution.  Samples stay in [0, theta); the threshold
    touches appear in spike_times with the post-reset state sampled."""

    samples: tuple[tuple[float, float], ...]
    spike_times: tuple[float, ...]
    switch_times: tuple[float, ...]


class FlowEngine:
    """Per-system bundle: on/off-phase flows plus the inter-spike time."""

    def __init__(self, system: SystemParams):
        self.system = system
        self.on = autonomous_flow(system.field, system.forcing.A, system.theta)
        self.off = autonomous_flow(system.field, 0.0, system.theta)
        self.delta: Optional[float] = self.on.time_to_threshold(0.0)

    def window(self, x0: float, horizon: Optional[float] = None):
        """Advance one forcing window (or its first ``horizon`` time units).

        Returns (end state, spike times relative to the window start).  A
        crossing within TIE_TOL of the on/off switch (or of the window end
        when d = 1) counts as a spike, so the boundary state belongs to the
        upper spike-count branch.
        """
        forcing = self.system.forcing
        T, d = forcing.T, forcing.d
        t_hi = T if horizon is None else min(horizon, T)
        dT = d * T
        on_end = min(dT, t_hi)
        spikes: list[float] = []
        x = x0
        if d > 0.0 and on_end > 0.0:
            t1 = self.on.time_to_threshold(x)
            if t1 is not None and t1 <= on_end + TIE_TOL:
                t1 = min(t1, on_end)
                delta = self.delta
                k = 1 + int(math.floor((on_end + TIE_TOL - t1) / delta))
                t_last = t1 + (k - 1) * delta
                while t_last > on_end + TIE_TOL and k > 1:
                    k -= 1
                    t_last -= delta
                spikes = [t1 + i * delta for i in range(k)]
                x = self.on.flow(0.0, max(0.0, on_end - t_last))
            else:
                x = self.on.flow(x, on_end)
        if t_hi > dT:
            x = self.off.flow(x, t_hi - dT)
        return min(x, self.system.theta), spikes


@lru_cache(maxsize=4096)
def engine_for(system: SystemParams) -> FlowEngine:
    return FlowEngine(system)


def _segment_samples(flow, x_start: float, t_abs0: float, duration: float,
                     sample_dt: float, out: list):
    if duration <= 0.0 or not math.isfinite(sample_dt) or sample_dt <= 0.0:
        return
    n_interior = min(int(duration / sample_dt), 4096)
    for i in range(1, n_interior + 1):
        tr = duration * i / (n_interior + 1)
        out.append((t_abs0 + tr, flow.flow(x_start, tr)))


def hybrid_flow(system: SystemParams, x0: float, t_end: float,
                sample_dt: Optional[float] = None) -> HybridTrajectory:
    """Concatenate on/off-phase flows and resets over [0, t_end].

    ``sample_dt`` bounds the spacing of interior trajectory samples (default
    T/64; pass math.inf to record segment endpoints only).
    """
    theta = system.theta
    if not 0.0 <= x0 < theta:
        raise ValueError(f"x0 must lie in [0, theta), got {x0}")
    if not t_end > 0.0:
        raise ValueError("t_end must be positive")
    forcing = system.forcing
    T, d = forcing.T, forcing.d
    if sample_dt is None:
        sample_dt = T / 64.0
    engine = engine_for(system)

    samples: list[tuple[float, float]] = [(0.0, x0)]
    spike_times: list[float] = []
    switch_times: list[float] = []
    x = x0
    k = 0
    while k * T < t_end - TIE_TOL:
        w_start = k * T
        horizon = min(T, t_end - w_start)
        x_end, spikes = engine.window(x, horizon)
        dT = d * T
        # sample the smooth pieces of this window
        t_prev, x_prev = 0.0, x
        for t_sp in spikes:
            _segment_samples(engine.on, x_prev, w_start + t_prev,
                             t_sp - t_prev, sample_dt, samples)
            spike_times.append(w_start + t_sp)
            samples.append((w_start + t_sp, 0.0))
            t_prev, x_prev = t_sp, 0.0
        on_end = min(dT, horizon)
        if on_end > t_prev:
            _segment_samples(engine.on, x_prev, w_start + t_prev,
                             on_end - t_prev, sample_dt, samples)
            x_prev = engine.on.flow(x_prev, on_end - t_prev)
            t_prev = on_end
        if 0.0 < d < 1.0 and horizon >= dT - TIE_TOL:
            switch_times.append(w_start + dT)
            samples.append((w_start + dT, min(x_prev, theta)))
        if horizon > t_prev:
            _segment_samples(engine.off, x_prev, w_start + t_prev,
                             horizon - t_prev, sample_dt, samples)
        samples.append((w_start + horizon, x_end))
        x = x_end
        k += 1

    # drop duplicate time stamps introduced at segment joins
    dedup: list[tuple[float, float]] = []
    for t, v in samples:
        if dedup and t <= dedup[-1][0]:
            continue
        dedup.append((t, min(v, theta)))
    return HybridTrajectory(
        samples=tuple(dedup),
        spike_times=tuple(spike_times),
        switch_times=tuple(switch_times),
    )
