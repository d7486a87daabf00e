import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import affine_oracle as oracle
from strobomap import (Family, ForcingParams, NoEquilibrium, SystemParams,
                       VectorFieldSpec, check_hypotheses, eval_field,
                       forcing_value)
from strobomap.flows import flow_autonomous, hybrid_flow, spike_time_delta

LIN = VectorFieldSpec.linear(-1.0, 0.5)


class TestVectorFields:
    def test_linear_equilibrium_is_zero_of_field(self):
        assert eval_field(LIN, 0.5, 0.0) == 0.0

    def test_linear_affine_arithmetic(self):
        assert eval_field(LIN, 0.0, 2.0) == 2.5

    def test_quintic_at_published_parameters(self, quintic_field):
        # value forced by the formula a*(x-b)^5 - c*x at x = b
        assert eval_field(quintic_field, 0.7, 0.0) == pytest.approx(-0.007, abs=1e-15)

    def test_arctan_value_and_slope(self, arctan_field):
        assert eval_field(arctan_field, 0.1, 0.0) == 0.0
        assert float(arctan_field.fprime(0.1)) == -100.0

    def test_coefficient_arity_enforced(self):
        with pytest.raises(ValueError):
            VectorFieldSpec(Family.LINEAR, (1.0, 2.0, 3.0))
        with pytest.raises(ValueError):
            VectorFieldSpec(Family.QUINTIC, (1.0, 2.0))

    def test_vectorized_evaluation_matches_scalar(self, quintic_field):
        xs = np.linspace(0.0, 1.0, 7)
        vec = np.asarray(quintic_field.f(xs))
        for x, v in zip(xs, vec):
            assert v == pytest.approx(float(quintic_field.f(float(x))))


class TestForcing:
    FZ = ForcingParams(A=2.0, d=0.5, T=1.9)

    def test_inside_pulse(self):
        assert forcing_value(self.FZ, 0.3) == 2.0

    def test_after_pulse(self):
        assert forcing_value(self.FZ, 1.0) == 0.0

    def test_zero_duty_cycle_never_on(self):
        fz = ForcingParams(A=2.0, d=0.0, T=1.9)
        for t in (0.0, 0.3, 1.0, 5.7):
            assert forcing_value(fz, t) == 0.0

    def test_time_origin_counts_as_pulse_start(self):
        assert forcing_value(self.FZ, 0.0) == 2.0

    def test_period_end_belongs_to_off_phase(self):
        assert forcing_value(self.FZ, 1.9) == 0.0

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            ForcingParams(A=1.0, d=1.5, T=1.0)
        with pytest.raises(ValueError):
            ForcingParams(A=1.0, d=0.5, T=0.0)
        with pytest.raises(ValueError):
            ForcingParams(A=-1.0, d=0.5, T=1.0)


class TestHypotheses:
    def test_linear_reference(self, l1):
        report = check_hypotheses(l1(0.0))
        assert report.h1_ok and report.h2_ok
        assert report.x_bar == pytest.approx(0.5, abs=1e-12)

    def test_arctan_root_from_oddness(self, arctan_field):
        system = SystemParams(field=arctan_field,
                              forcing=ForcingParams(A=0.0, d=0.5, T=0.5))
        report = check_hypotheses(system)
        assert report.h1_ok and report.h2_ok
        assert report.x_bar == pytest.approx(0.1, abs=1e-10)

    def test_quintic_passes_both(self, quintic_field):
        system = SystemParams(field=quintic_field,
                              forcing=ForcingParams(A=1.0, d=0.5, T=1.0))
        report = check_hypotheses(system)
        assert report.h1_ok and report.h2_ok

    def test_increasing_field_fails_h2(self):
        field = VectorFieldSpec.linear(1.0, -0.5)
        system = SystemParams(field=field,
                              forcing=ForcingParams(A=0.0, d=0.5, T=1.0))
        report = check_hypotheses(system)
        assert not report.h2_ok
        assert report.max_fprime == pytest.approx(1.0)
        assert not report.h1_ok  # the root at 0.5 is repelling

    def test_no_equilibrium_raises(self):
        field = VectorFieldSpec.linear(-1.0, 2.0)  # root at 2 > theta
        system = SystemParams(field=field,
                              forcing=ForcingParams(A=0.0, d=0.5, T=1.0))
        with pytest.raises(NoEquilibrium):
            check_hypotheses(system)

    def test_forced_equilibrium_above_threshold(self, l1):
        report = check_hypotheses(l1(2.0))
        assert report.forced_equilibrium == pytest.approx(2.5, abs=1e-12)

    def test_forced_equilibrium_absent_for_saturating_field(self, arctan_field):
        system = SystemParams(field=arctan_field,
                              forcing=ForcingParams(A=5.0, d=0.5, T=0.5))
        report = check_hypotheses(system)
        assert report.forced_equilibrium is None  # |arctan| < pi/2 < 5


class TestFlowAutonomous:
    def test_closed_form_reference_value(self):
        # phi(1; 0; 0) = 0.5 * (1 - e^-1), frozen from the affine oracle
        expected = 0.3160602794142788
        assert flow_autonomous(LIN, 0.0, 0.0, 1.0) == pytest.approx(expected, abs=1e-15)
        assert oracle.flow(-1.0, 0.5, 0.0, 0.0, 1.0) == pytest.approx(expected, abs=1e-15)

    def test_identity_at_time_zero(self, quintic_field):
        for field in (LIN, quintic_field):
            assert flow_autonomous(field, 0.7, 0.123, 0.0) == 0.123

    def test_forced_equilibrium_is_stationary(self):
        # x* = 0.8 for A = 0.3
        assert flow_autonomous(LIN, 0.3, 0.8, 5.0) == pytest.approx(0.8, abs=1e-12)

    def test_numeric_route_matches_closed_form(self, rng):
        for _ in range(25):
            x0 = rng.uniform(0.0, 1.0)
            A = rng.uniform(0.0, 3.0)
            t = rng.uniform(0.0, 10.0)
            closed = flow_autonomous(LIN, A, x0, t, method="closed_form")
            numeric = flow_autonomous(LIN, A, x0, t, method="numeric")
            assert abs(closed - numeric) <= 1e-9

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            flow_autonomous(LIN, 0.0, 0.0, -1.0)

    @settings(max_examples=40, deadline=None)
    @given(x_lo=st.floats(0.0, 0.9), gap=st.floats(1e-6, 0.09),
           A=st.floats(0.0, 3.0), t=st.floats(0.01, 5.0))
    def test_order_preservation(self, x_lo, gap, A, t):
        # scalar flows cannot cross
        lo = flow_autonomous(LIN, A, x_lo, t)
        hi = flow_autonomous(LIN, A, x_lo + gap, t)
        assert lo < hi

    @settings(max_examples=40, deadline=None)
    @given(x_lo=st.floats(0.0, 0.9), gap=st.floats(1e-6, 0.09),
           t=st.floats(0.01, 5.0))
    def test_unforced_contraction(self, x_lo, gap, t):
        # with f' < 0 the unforced flow contracts distances
        lo = flow_autonomous(LIN, 0.0, x_lo, t)
        hi = flow_autonomous(LIN, 0.0, x_lo + gap, t)
        assert hi - lo < gap


class TestSpikeTimeDelta:
    def test_reference_values_match_logs(self):
        assert spike_time_delta(LIN, 2.0, 1.0) == pytest.approx(
            math.log(5.0 / 3.0), abs=1e-12)
        assert spike_time_delta(LIN, 0.8, 1.0) == pytest.approx(
            math.log(1.3 / 0.3), abs=1e-12)

    def test_subthreshold_equilibrium_blocks_spiking(self):
        assert spike_time_delta(LIN, 0.3, 1.0) is None  # x* = 0.8 < theta

    def test_nonlinear_route_matches_quadrature(self, quintic_field):
        from scipy.integrate import quad
        A = 1.0 / 0.79
        expected, _ = quad(lambda x: 1.0 / (float(quintic_field.f(x)) + A),
                           0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        got = spike_time_delta(quintic_field, A, 1.0)
        assert got == pytest.approx(expected, abs=1e-10)

    def test_strictly_decreasing_in_amplitude(self):
        # d(delta)/dA < 0; checked on 20 increasing amplitudes
        amps = np.linspace(0.55, 3.0, 20)
        deltas = [spike_time_delta(LIN, A, 1.0) for A in amps]
        assert all(d2 < d1 for d1, d2 in zip(deltas, deltas[1:]))


class TestHybridFlow:
    def test_full_duty_cycle_spikes_at_multiples_of_delta(self, l1):
        delta = math.log(5.0 / 3.0)
        system = l1(2.0, d=1.0, T=1.0)
        traj = hybrid_flow(system, 0.0, 2.0 * delta)
        assert len(traj.spike_times) == 2
        assert traj.spike_times[0] == pytest.approx(delta, abs=1e-12)
        assert traj.spike_times[1] == pytest.approx(2.0 * delta, abs=1e-12)

    def test_subthreshold_never_spikes(self, l1):
        traj = hybrid_flow(l1(0.3), 0.0, 100.0)
        assert traj.spike_times == ()

    def test_one_spike_when_started_above_boundary(self, l1):
        # x0 = 0.7 > sigma_1 ~ 0.5243
        traj = hybrid_flow(l1(0.8), 0.7, 1.9)
        assert len(traj.spike_times) == 1
        assert 0.0 < traj.spike_times[0] <= 0.95

    def test_samples_stay_in_domain_and_increase(self, l1):
        traj = hybrid_flow(l1(0.8), 0.2, 3 * 1.9)
        ts = [t for t, _ in traj.samples]
        xs = [x for _, x in traj.samples]
        assert all(t2 > t1 for t1, t2 in zip(ts, ts[1:]))
        assert all(0.0 <= x <= 1.0 for x in xs)
        assert all(x < 1.0 for x in xs[1:])

    def test_switch_times_on_the_duty_grid(self, l1):
        traj = hybrid_flow(l1(0.8), 0.0, 2 * 1.9)
        assert traj.switch_times == (pytest.approx(0.95), pytest.approx(0.95 + 1.9))

    def test_on_phase_gaps_equal_delta(self, l1):
        system = l1(2.0, d=0.8)
        delta = math.log(5.0 / 3.0)
        traj = hybrid_flow(system, 0.0, 10 * 1.9)
        same_window = [
            (t1, t2) for t1, t2 in zip(traj.spike_times, traj.spike_times[1:])
            if math.floor(t1 / 1.9) == math.floor(t2 / 1.9)
        ]
        assert same_window
        for t1, t2 in same_window:
            assert t2 - t1 == pytest.approx(delta, abs=1e-10)

    def test_spike_count_matches_strobo_iterates(self, l1):
        from strobomap import strobo_map
        system = l1(1.7, d=0.6)
        k = 7
        traj = hybrid_flow(system, 0.0, k * 1.9, sample_dt=math.inf)
        x, total = 0.0, 0
        for _ in range(k):
            res = strobo_map(system, x)
            total += res.spikes
            x = res.x_T
        assert len(traj.spike_times) == total

    def test_precondition_validation(self, l1):
        with pytest.raises(ValueError):
            hybrid_flow(l1(0.8), 1.0, 1.0)
        with pytest.raises(ValueError):
            hybrid_flow(l1(0.8), 0.0, 0.0)
