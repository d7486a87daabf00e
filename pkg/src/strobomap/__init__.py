"""Stroboscopic-map dynamics of periodically pulse-driven
integrate-and-fire systems: spike-count partitions, border-collision
bifurcation curves, period-adding orbits and devil's-staircase scans."""

__version__ = "0.1.0"

from .bifurcation import (CurveKind, CurveTag, ScanPoint, ScanSeries,
                          SweepCell, SweepGrid, amplitude_for_delta, scan_1d,
                          solve_curve, sweep_2d, verify_ordering, window_path)
from .errors import (AddingViolation, BoundaryAbsent, ConfigError,
                     DegenerateBoundary, IntegrationFailure,
                     MonotonicityViolation, NoEquilibrium, NoRoot,
                     NoSpikeRegime, OrderingViolation, StrobomapError)
from .flows import (HybridTrajectory, flow_autonomous, hybrid_flow,
                    spike_time_delta)
from .models import (Family, ForcingParams, HypothesisReport, SystemParams,
                     VectorFieldSpec, check_hypotheses, eval_field,
                     forcing_value)
from .strobo import (FixedPoint, GapOffsets, StroboResult, fixed_point,
                     gap_offsets, lateral_values, sigma_boundary, spike_count,
                     strobo_map)
from .symbolic import (Aperiodic, FareyNode, FareyTree, Orbit, Plateau,
                       RotationStats, SymbolicSequence, adding_check,
                       canonical_rotation, detect_orbit, empirical_firing_rate,
                       encode, farey_tree, firing_number, firing_rate,
                       orbit_stats, rotation_number, staircase)

__all__ = [name for name in dir() if not name.startswith("_")]
