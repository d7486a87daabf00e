"""Periodic orbits of the return map, their L/R words, rotation and firing
numbers, the Farey tree of the adding structure, and staircase validation.

Rotation and firing numbers are exact rationals throughout; plateau merging
and Farey checks never compare floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Iterator, Optional, Union

from .errors import (AddingViolation, BoundaryAbsent, DegenerateBoundary,
                     MonotonicityViolation)
from .flows import engine_for, hybrid_flow
from .models import SystemParams
from .strobo import sigma_boundary

if TYPE_CHECKING:  # pragma: no cover - type-only import, avoids a cycle
    from .bifurcation import ScanSeries

DEFAULT_BURN_IN = 500
DEFAULT_MAX_PERIOD = 64
DEFAULT_ORBIT_TOL = 1e-9
ENCODING_BOUNDARY_TOL = 1e-9
DEFAULT_HORIZON_PERIODS = 2000


def canonical_rotation(word: str) -> str:
    """Lexicographically minimal cyclic shift."""
    return min(word[i:] + word[:i] for i in range(len(word)))


@dataclass(frozen=True)
class SymbolicSequence:
    """Cyclic word over {L, R}, stored in canonical rotation."""

    word: str

    def __post_init__(self):
        if not self.word or set(self.word) - {"L", "R"}:
            raise ValueError(f"word must be nonempty over {{L, R}}, got {self.word!r}")
        object.__setattr__(self, "word", canonical_rotation(self.word))

    def __len__(self):
        return len(self.word)

    def __str__(self):
        return self.word


@dataclass(frozen=True)
class Orbit:
    """Detected periodic orbit, listed from its minimal point."""

    points: tuple[float, ...]
    period: int
    branch_n: int
    per_point_spikes: tuple[int, ...]

    @property
    def total_spikes(self) -> int:
        return sum(self.per_point_spikes)


@dataclass(frozen=True)
class Aperiodic:
    """No period up to the cap; expected on the Cantor set of irrational
    rotation numbers."""

    max_period: int
    tail: tuple[float, ...]


@dataclass(frozen=True)
class RotationStats:
    rho: Fraction
    eta: Fraction
    rate: float


def detect_orbit(system: SystemParams, x0: float,
                 burn_in: int = DEFAULT_BURN_IN,
                 max_period: int = DEFAULT_MAX_PERIOD,
                 tol: float = DEFAULT_ORBIT_TOL) -> Union[Orbit, Aperiodic]:
    """Cycle detection on the return map by direct iteration.

    Iterates burn_in times, then accepts the smallest period p <= max_period
    for which |x_{k+p} - x_k| <= tol holds sustained over p further iterates.
    """
    theta = system.theta
    if not 0.0 <= x0 < theta:
        raise ValueError(f"x0 must lie in [0, theta), got {x0}")
    engine = engine_for(system)
    x = x0
    for _ in range(burn_in):
        x, _ = engine.window(x)
        x = min(x, math.nextafter(theta, 0.0))

    n_states = 2 * max_period + 1
    xs = [x]
    spikes = []
    for _ in range(n_states - 1):
        x, sp = engine.window(x)
        x = min(x, math.nextafter(theta, 0.0))
        xs.append(x)
        spikes.append(len(sp))

    for p in range(1, max_period + 1):
        if all(abs(xs[i + p] - xs[i]) <= tol for i in range(p + 1)):
            pts = xs[:p]
            per_point = spikes[:p]
            start = min(range(p), key=lambda i: pts[i])
            pts = pts[start:] + pts[:start]
            per_point = per_point[start:] + per_point[:start]
            return Orbit(points=tuple(pts), period=p,
                         branch_n=min(per_point),
                         per_point_spikes=tuple(per_point))
    return Aperiodic(max_period=max_period, tail=tuple(xs[-8:]))


def encode(orbit: Orbit, system: SystemParams,
           boundary_tol: float = ENCODING_BOUNDARY_TOL) -> SymbolicSequence:
    """L/R word of an orbit: L for points spiking n times, R for n + 1.

    Equivalently L/R separates points below/above the boundary between the
    two occupied partition sets; points within boundary_tol of it are
    refused as degenerate."""
    n = orbit.branch_n
    extra = set(orbit.per_point_spikes) - {n, n + 1}
    if extra:
        raise ValueError(
            f"orbit occupies spike classes {sorted(set(orbit.per_point_spikes))}; "
            "expected two consecutive classes")
    if orbit.period > 1:
        sigma = sigma_boundary(system, n + 1)
        if sigma is None:
            raise BoundaryAbsent(
                f"boundary {n + 1} absent although the orbit straddles it")
        for p in orbit.points:
            if abs(p - sigma) <= boundary_tol:
                raise DegenerateBoundary(
                    f"orbit point {p} within {boundary_tol} of the boundary {sigma}")
    word = "".join("L" if s == n else "R" for s in orbit.per_point_spikes)
    return SymbolicSequence(word)


def rotation_number(seq: Union[SymbolicSequence, str]) -> Fraction:
    """Share of R symbols, as an exact reduced rational."""
    word = seq.word if isinstance(seq, SymbolicSequence) else seq
    if not word or set(word) - {"L", "R"}:
        raise ValueError(f"word must be nonempty over {{L, R}}, got {word!r}")
    return Fraction(word.count("R"), len(word))


def firing_number(seq: Union[SymbolicSequence, str], n: int) -> Fraction:
    """Average spikes per map iterate for a branch-n orbit: n + rho."""
    if n < 0:
        raise ValueError("branch index must be >= 0")
    return n + rotation_number(seq)


def firing_rate(eta: Union[Fraction, float], T: float) -> float:
    """Average spikes per unit time."""
    if not T > 0.0:
        raise ValueError("period must be positive")
    return float(eta) / T


def orbit_stats(orbit: Orbit, seq: SymbolicSequence, T: float) -> RotationStats:
    rho = rotation_number(seq)
    eta = orbit.branch_n + rho
    return RotationStats(rho=rho, eta=eta, rate=firing_rate(eta, T))


def empirical_firing_rate(system: SystemParams, x0: float,
                          horizon: Optional[float] = None) -> float:
    """Brute-force spike count over [0, horizon] divided by horizon."""
    if horizon is None:
        horizon = DEFAULT_HORIZON_PERIODS * system.forcing.T
    traj = hybrid_flow(system, x0, horizon, sample_dt=math.inf)
    return len(traj.spike_times) / horizon


# ---------------------------------------------------------------------------
# Farey tree


@dataclass
class FareyNode:
    word: str
    rho: Fraction
    depth: int
    parent_left: Optional["FareyNode"] = None
    parent_right: Optional["FareyNode"] = None
    children: list["FareyNode"] = field(default_factory=list)

    def __repr__(self):
        return f"FareyNode({self.word}, {self.rho})"


@dataclass
class FareyTree:
    """Mediant tree between the root words L (rho 0) and R (rho 1).

    levels[k] holds the nodes created at generation k; generation 0 is the
    root pair."""

    levels: list[list[FareyNode]]

    def nodes(self) -> Iterator[FareyNode]:
        for level in self.levels:
            yield from level

    def words(self) -> set[str]:
        return {node.word for node in self.nodes()}

    def node_by_word(self, word: str) -> Optional[FareyNode]:
        canon = canonical_rotation(word)
        for node in self.nodes():
            if node.word == canon:
                return node
        return None


def farey_tree(depth: int) -> FareyTree:
    """Enumerate the mediant tree down to the given generation depth."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    left = FareyNode("L", Fraction(0, 1), 0)
    right = FareyNode("R", Fraction(1, 1), 0)
    levels = [[left, right]]
    frontier = [left, right]
    for gen in range(1, depth + 1):
        new_frontier = [frontier[0]]
        level = []
        for a, b in zip(frontier, frontier[1:]):
            child = FareyNode(
                word=a.word + b.word,
                rho=Fraction(a.rho.numerator + b.rho.numerator,
                             a.rho.denominator + b.rho.denominator),
                depth=gen, parent_left=a, parent_right=b)
            a.children.append(child)
            b.children.append(child)
            level.append(child)
            new_frontier.extend((child, b))
        levels.append(level)
        frontier = new_frontier
    return FareyTree(levels=levels)


# ---------------------------------------------------------------------------
# staircase analysis of 1D scans


@dataclass(frozen=True)
class Plateau:
    """Maximal run of scan points sharing one exact firing number."""

    eta: Fraction
    rho: Fraction  # relative to the lowest branch crossed by the scan
    word: Optional[str]
    period: int
    spikes_total: int
    lam_lo: float
    lam_hi: float
    n_points: int


def staircase(series: "ScanSeries") -> list[Plateau]:
    """Merge equal-firing-number runs and enforce monotonicity.

    Aperiodic or degenerate points never split a plateau; they are recorded
    in the series but skipped here.  For a scan spanning one adding window
    the endpoint plateaus must carry rho = 0 and rho = 1."""
    ok = [p for p in series.points if p.status == "ok"]
    if not ok:
        return []
    base = min(p.branch_n for p in ok)
    plateaus: list[Plateau] = []
    for p in ok:
        if plateaus and plateaus[-1].eta == p.eta:
            prev = plateaus[-1]
            plateaus[-1] = Plateau(
                eta=prev.eta, rho=prev.rho, word=prev.word or p.word,
                period=prev.period, spikes_total=prev.spikes_total,
                lam_lo=prev.lam_lo, lam_hi=p.lam, n_points=prev.n_points + 1)
        else:
            if plateaus and p.eta < plateaus[-1].eta:
                raise MonotonicityViolation(
                    f"firing number fell from {plateaus[-1].eta} to {p.eta} "
                    f"at lambda={p.lam}")
            plateaus.append(Plateau(
                eta=p.eta, rho=p.eta - base, word=p.word, period=p.period,
                spikes_total=p.spikes_total, lam_lo=p.lam, lam_hi=p.lam,
                n_points=1))
    if series.window_span and plateaus:
        if plateaus[0].rho != 0 or plateaus[-1].rho != 1:
            raise MonotonicityViolation(
                f"window scan endpoints carry rho {plateaus[0].rho} .. "
                f"{plateaus[-1].rho}; expected 0 .. 1")
    return plateaus


def _unimodular(a: Plateau, b: Plateau) -> bool:
    ra, rb = a.eta, b.eta
    return abs(ra.numerator * rb.denominator - rb.numerator * ra.denominator) == 1


@dataclass(frozen=True)
class AddingReport:
    verified: tuple[tuple[str, str, str, int], ...]
    pairs_checked: int
    pairs_skipped: int
    pairs_unresolved: int


def adding_check(series: "ScanSeries",
                 refine: Callable[[float, float, int], "ScanSeries"],
                 depth: int = 3, refine_steps: int = 65,
                 max_detect_period: int = 64, max_zoom: int = 4,
                 lam_floor: float = 1e-12) -> AddingReport:
    """Verify the concatenation law between every pair of adjacent plateaus.

    Between plateaus with words s1 and s2 a plateau with word s1 s2 (and
    period p1 + p2) must appear; the check recurses into both sub-gaps down
    to the given depth.  ``refine(lam_lo, lam_hi, steps)`` scans a lambda
    subinterval, reporting lambdas in the parent's coordinates.

    Plateau widths shrink double-exponentially toward the window corners, so
    some predicted plateaus are narrower than anything double precision can
    hold.  A gap is zoomed at most ``max_zoom`` times; once it shrinks below
    ``lam_floor`` (or the predicted period exceeds the detector cap) the pair
    is counted unresolved rather than treated as a violation.  Pairs that are
    not Farey neighbors are skipped and counted."""
    plateaus = staircase(series)
    lam_values = [p.lam for p in series.points]
    lam_min, lam_max = min(lam_values), max(lam_values)
    base_step = (lam_max - lam_min) / max(1, len(lam_values) - 1)
    verified: list[tuple[str, str, str, int]] = []
    checked = skipped = unresolved = 0

    def verify(left: Plateau, right: Plateau, level: int, step: float):
        nonlocal checked, skipped, unresolved
        if level > depth:
            return
        if left.word is None or right.word is None:
            skipped += 1
            return
        if not _unimodular(left, right):
            skipped += 1
            return
        if left.period + right.period > max_detect_period:
            unresolved += 1
            return
        checked += 1
        expected_eta = Fraction(left.spikes_total + right.spikes_total,
                                left.period + right.period)
        expected_word = canonical_rotation(left.word + right.word)
        lam_a = max(lam_min, left.lam_hi - step)
        lam_b = min(lam_max, right.lam_lo + step)
        found = sub_plateaus = None
        for _zoom in range(max_zoom + 1):
            if lam_b - lam_a < lam_floor:
                unresolved += 1
                return
            sub = refine(lam_a, lam_b, refine_steps)
            sub_plateaus = staircase(sub)
            found = next((p for p in sub_plateaus if p.eta == expected_eta),
                         None)
            if found is not None:
                break
            # a resolved plateau other than the mediant sitting between the
            # parents breaks the Farey structure outright
            intruder = next((p for p in sub_plateaus
                             if left.eta < p.eta < right.eta), None)
            if intruder is not None:
                raise AddingViolation(
                    f"expected firing number {expected_eta} between words "
                    f"{left.word!r} and {right.word!r}, found {intruder.eta} "
                    f"(word {intruder.word!r}) instead")
            # just a sharp transition: shrink onto it and look again
            lefts = [p for p in sub_plateaus if p.eta == left.eta]
            rights = [p for p in sub_plateaus if p.eta == right.eta]
            if not lefts or not rights:
                unresolved += 1
                return
            sub_step = (lam_b - lam_a) / max(1, refine_steps - 1)
            lam_a = max(lam_min, lefts[-1].lam_hi - sub_step)
            lam_b = min(lam_max, rights[0].lam_lo + sub_step)
        else:
            unresolved += 1
            return
        if found.word is not None and found.word != expected_word:
            raise AddingViolation(
                f"plateau at {expected_eta} carries word {found.word!r}; "
                f"expected {expected_word!r}")
        verified.append((left.word, right.word, expected_word, level))
        sub_step = (lam_b - lam_a) / max(1, refine_steps - 1)
        sub_left = next((p for p in sub_plateaus if p.eta == left.eta), None)
        sub_right = next((p for p in sub_plateaus if p.eta == right.eta), None)
        if sub_left is not None:
            verify(sub_left, found, level + 1, sub_step)
        if sub_right is not None:
            verify(found, sub_right, level + 1, sub_step)

    for a, b in zip(plateaus, plateaus[1:]):
        verify(a, b, 1, base_step)
    return AddingReport(verified=tuple(verified), pairs_checked=checked,
                        pairs_skipped=skipped, pairs_unresolved=unresolved)
