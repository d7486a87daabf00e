"""Independent closed-form oracle for the linear family.

Everything here is derived from the explicit solution of x' = a*x + c,
x(t) = xe + (x0 - xe) * exp(a*t) with xe = -c/a, using only the math module.
It deliberately imports nothing from the package under test: expected values
in the suite are computed (or were frozen) from these formulas.
"""
import math


def xstar(a, b, A):
    return -(b + A) / a


def flow(a, b, A, x0, t):
    xe = xstar(a, b, A)
    return xe + (x0 - xe) * math.exp(a * t)


def time_to_theta(a, b, A, x0, theta):
    """Time for the driven flow to reach theta, or None."""
    xe = xstar(a, b, A)
    if a >= 0 or xe <= theta:
        return None
    return math.log((xe - x0) / (xe - theta)) / (-a)


def delta(a, b, A, theta):
    return time_to_theta(a, b, A, 0.0, theta)


def laterals(a, b, d, T, theta):
    t_off = T * (1.0 - d)
    return flow(a, b, 0.0, theta, t_off), flow(a, b, 0.0, 0.0, t_off)


def sigma_n(a, b, A, d, T, theta, n):
    """Boundary with index n, or None when outside [0, theta)."""
    dl = delta(a, b, A, theta)
    if dl is None:
        return None
    t_n = d * T - (n - 1) * dl
    if t_n <= 0.0 or t_n > dl:
        return None
    xe = xstar(a, b, A)
    return xe + (theta - xe) * math.exp(-a * t_n)


def strobo(a, b, A, d, T, theta, x0):
    """One application of the time-T map; returns (image, spike count)."""
    dT = d * T
    x, spikes = x0, 0
    if d > 0.0:
        t1 = time_to_theta(a, b, A, x0, theta)
        if t1 is not None and t1 <= dT:
            dl = delta(a, b, A, theta)
            spikes = 1 + int(math.floor((dT - t1) / dl))
            rem = dT - (t1 + (spikes - 1) * dl)
            x = flow(a, b, A, 0.0, rem)
        else:
            x = flow(a, b, A, x0, dT)
    if d < 1.0:
        x = flow(a, b, 0.0, x, T - dT)
    return x, spikes


def branch_maps(a, b, A, d, T, theta):
    """Affine coefficients of the two map branches around the boundary
    sigma_1: returns (aL, bL, aR, bR) with s(x) = aL*x + bL below and
    aR*x + bR above."""
    dT, t_off = d * T, T * (1.0 - d)
    xe_on = xstar(a, b, A)
    xe_off = xstar(a, b, 0.0)
    e_on, e_off = math.exp(a * dT), math.exp(a * t_off)
    # no spike: on-phase then off-phase, both affine
    aL = e_on * e_off
    bL = (xe_on * (1.0 - e_on) * e_off) + xe_off * (1.0 - e_off)
    # one spike: affine too, so the slope follows from two evaluations
    x_lo, x_hi = 0.97 * theta, 0.99 * theta
    y_lo, n_lo = strobo(a, b, A, d, T, theta, x_lo)
    y_hi, n_hi = strobo(a, b, A, d, T, theta, x_hi)
    assert n_lo == n_hi == 1, "branch_maps expects single-spike upper branch"
    aR = (y_hi - y_lo) / (x_hi - x_lo)
    bR = y_lo - aR * x_lo
    return aL, bL, aR, bR


def two_cycle(a, b, A, d, T, theta):
    """The LR 2-cycle of the affine branch maps, (x_low, x_high)."""
    aL, bL, aR, bR = branch_maps(a, b, A, d, T, theta)
    x_low = (aR * bL + bR) / (1.0 - aR * aL)
    x_high = aL * x_low + bL
    return x_low, x_high


def branch_fixed_candidates(a, b, A, d, T, theta):
    """Fixed points of each affine branch continued over all of [0, theta)."""
    aL, bL, aR, bR = branch_maps(a, b, A, d, T, theta)
    return bL / (1.0 - aL), bR / (1.0 - aR)


def _bisect(fn, lo, hi, tol=1e-14, iters=200):
    flo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (fn(mid) > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def curve_A0(a, b, d, T, theta):
    """Amplitude where sigma_1 meets the left lateral value."""
    s_minus, _ = laterals(a, b, d, T, theta)
    lo = -(a * theta + b) + 1e-12

    def h(A):
        s = sigma_n(a, b, A, d, T, theta, 1)
        return (s if s is not None else -1.0) - s_minus

    hi = lo + 1.0
    while h(hi) > 0.0:
        hi *= 2.0
    return _bisect(h, lo, hi)


def curve_A1R(a, b, d, T, theta):
    """Amplitude where sigma_1 meets the right lateral value."""
    _, s_plus = laterals(a, b, d, T, theta)
    lo = -(a * theta + b) + 1e-12

    def h(A):
        s = sigma_n(a, b, A, d, T, theta, 1)
        return (s if s is not None else -1.0) - s_plus

    hi = lo + 1.0
    while h(hi) > 0.0:
        hi *= 2.0
    return _bisect(h, lo, hi)
