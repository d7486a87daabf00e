"""Vector-field families, square-wave forcing and the hybrid system definition.

The state obeys ``x' = f(x) + I(t)`` on the half-open interval ``[0, theta)``
with the reset ``x = theta -> x = 0``.  ``I`` is a square pulse of amplitude
``A`` that is on during the first fraction ``d`` of every period ``T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import NoEquilibrium

H2_GRID_POINTS = 1001  # sampling density for the monotone-decrease check


class Family(str, Enum):
    LINEAR = "linear"
    QUINTIC = "quintic"
    ARCTAN = "arctan"


_ARITY = {Family.LINEAR: 2, Family.QUINTIC: 3, Family.ARCTAN: 2}


@dataclass(frozen=True)
class VectorFieldSpec:
    """One of the built-in scalar fields.

    linear:   f(x) = a*x + b              coefficients (a, b)
    quintic:  f(x) = a*(x - b)**5 - c*x   coefficients (a, b, c)
    arctan:   f(x) = -atan(a*(x - b))     coefficients (a, b)
    """

    family: Family
    coefficients: tuple[float, ...]

    def __post_init__(self):
        family = Family(self.family)
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) != _ARITY[family]:
            raise ValueError(
                f"{family.value} field takes {_ARITY[family]} coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def linear(cls, a: float, b: float) -> "VectorFieldSpec":
        return cls(Family.LINEAR, (a, b))

    @classmethod
    def quintic(cls, a: float, b: float, c: float) -> "VectorFieldSpec":
        return cls(Family.QUINTIC, (a, b, c))

    @classmethod
    def arctan(cls, a: float, b: float) -> "VectorFieldSpec":
        return cls(Family.ARCTAN, (a, b))

    def f(self, x):
        """Evaluate f(x); accepts scalars or numpy arrays."""
        if self.family is Family.LINEAR:
            a, b = self.coefficients
            return a * x + b
        if self.family is Family.QUINTIC:
            a, b, c = self.coefficients
            return a * (x - b) ** 5 - c * x
        a, b = self.coefficients
        return -np.arctan(a * (x - b))

    def fprime(self, x):
        """Evaluate f'(x); accepts scalars or numpy arrays."""
        if self.family is Family.LINEAR:
            a, _ = self.coefficients
            return a * np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else a
        if self.family is Family.QUINTIC:
            a, b, c = self.coefficients
            return 5.0 * a * (x - b) ** 4 - c
        a, b = self.coefficients
        return -a / (1.0 + (a * (x - b)) ** 2)


@dataclass(frozen=True)
class ForcingParams:
    """Square-wave drive: amplitude A, duty cycle d in [0, 1], period T > 0."""

    A: float
    d: float
    T: float

    def __post_init__(self):
        if not 0.0 <= self.d <= 1.0:
            raise ValueError(f"duty cycle must lie in [0, 1], got {self.d}")
        if not self.T > 0.0:
            raise ValueError(f"period must be positive, got {self.T}")
        if self.A < 0.0:
            raise ValueError(f"amplitude must be nonnegative, got {self.A}")


@dataclass(frozen=True)
class SystemParams:
    """Full hybrid system: field, drive, threshold.  The reset value is fixed at 0."""

    field: VectorFieldSpec
    forcing: ForcingParams
    theta: float = 1.0
    reset_value: float = 0.0

    def __post_init__(self):
        if not self.theta > 0.0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.reset_value != 0.0:
            raise ValueError("reset value is fixed at 0")

    def with_forcing(self, A: Optional[float] = None, d: Optional[float] = None,
                     T: Optional[float] = None) -> "SystemParams":
        """Copy with some forcing parameters replaced."""
        f = self.forcing
        return SystemParams(
            field=self.field,
            forcing=ForcingParams(
                A=f.A if A is None else A,
                d=f.d if d is None else d,
                T=f.T if T is None else T,
            ),
            theta=self.theta,
        )


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the two structural checks on the unforced field."""

    h1_ok: bool
    x_bar: float
    h2_ok: bool
    max_fprime: float
    forced_equilibrium: Optional[float]


def eval_field(field: VectorFieldSpec, x: float, A: float = 0.0) -> float:
    """Right-hand side f(x) + A."""
    return float(field.f(x)) + A


def forcing_value(forcing: ForcingParams, t: float) -> float:
    """Square-wave value at time t >= 0.

    The pulse is on for phases in (0, d*T]; t = 0 is treated as phase 0+ so a
    trajectory started at the origin of time immediately feels the drive.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if forcing.d == 0.0:
        return 0.0
    if forcing.d == 1.0:
        return forcing.A
    if t == 0.0:
        return forcing.A
    phase = math.fmod(t, forcing.T)
    return forcing.A if 0.0 < phase <= forcing.d * forcing.T else 0.0


def _unforced_equilibrium(field: VectorFieldSpec, theta: float) -> float:
    """Root of f on (0, theta), located by sign-change bracketing + brentq."""
    xs = np.linspace(0.0, theta, H2_GRID_POINTS)
    fx = np.asarray(field.f(xs), dtype=float)
    sign_flips = np.nonzero(np.diff(np.sign(fx)) != 0)[0]
    interior = [i for i in sign_flips if 0.0 < xs[i + 1] and xs[i] < theta]
    if not interior:
        raise NoEquilibrium(
            f"f has no sign change on (0, {theta}) for {field.family.value} field"
        )
    i = interior[0]
    if fx[i] == 0.0:
        return float(xs[i])
    return float(brentq(lambda x: float(field.f(x)), xs[i], xs[i + 1], xtol=1e-14))


def forced_equilibrium(field: VectorFieldSpec, A: float,
                       x_hint: float = 1.0) -> Optional[float]:
    """Root of f(x) + A, searched on an expanding bracket; None if f never
    descends below -A (e.g. the arctan family with A >= pi/2 * |a| scale)."""
    g = lambda x: float(field.f(x)) + A
    lo = 0.0
    if g(lo) <= 0.0:
        # equilibrium at or below the reset value; bracket downward
        hi = lo
        lo = -max(1.0, abs(x_hint))
        for _ in range(60):
            if g(lo) > 0.0:
                break
            lo *= 2.0
        else:
            return None
        return float(brentq(g, lo, hi, xtol=1e-14))
    hi = max(1.0, abs(x_hint))
    for _ in range(60):
        if g(hi) < 0.0:
            break
        hi *= 2.0
    else:
        return None
    return float(brentq(g, lo, hi, xtol=1e-14))


def check_hypotheses(system: SystemParams) -> HypothesisReport:
    """Verify the two structural assumptions on the unforced field.

    h1: a unique attracting equilibrium x_bar in (0, theta); h2: f' < 0 on
    [0, theta], sampled on a uniform grid.  Also reports the equilibrium of
    the driven field f + A when one exists.
    """
    field, theta = system.field, system.theta
    x_bar = _unforced_equilibrium(field, theta)
    h1_ok = float(field.fprime(x_bar)) < 0.0

    xs = np.linspace(0.0, theta, H2_GRID_POINTS)
    fprimes = np.asarray(field.fprime(xs), dtype=float)
    max_fprime = float(fprimes.max())
    h2_ok = bool(max_fprime < 0.0)

    x_star = forced_equilibrium(field, system.forcing.A, x_hint=theta)
    return HypothesisReport(
        h1_ok=h1_ok,
        x_bar=x_bar,
        h2_ok=h2_ok,
        max_fprime=max_fprime,
        forced_equilibrium=x_star,
    )
