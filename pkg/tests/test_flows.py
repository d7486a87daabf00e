"""Cross-validation of the table-based flow route against direct adaptive
integration, for both nonlinear families in both drive regimes."""
import math

import numpy as np
import pytest

from strobomap import ForcingParams, IntegrationFailure, SystemParams
from strobomap.flows import autonomous_flow, engine_for, flow_autonomous
from strobomap.models import VectorFieldSpec


AMPLITUDES = {
    "quintic": [0.0, 0.2, 1.0 / 0.79, 3.0],
    "arctan": [0.0, 1.2, 1.0 / 0.2, 9.0],
}


@pytest.mark.parametrize("family,amp_index", [
    (fam, i) for fam, amps in AMPLITUDES.items() for i in range(len(amps))
])
def test_table_flow_matches_integrator(family, amp_index, quintic_field,
                                       arctan_field, rng):
    field = {"quintic": quintic_field, "arctan": arctan_field}[family]
    A = AMPLITUDES[family][amp_index]
    table = autonomous_flow(field, A, 1.0)
    for _ in range(8):
        x0 = float(rng.uniform(0.0, 1.0))
        if table.delta is not None:
            # stay below the threshold crossing
            tau = table.time_to_threshold(x0)
            t = float(rng.uniform(0.0, 1.0)) * 0.95 * tau
            if t <= 0.0:
                continue
        else:
            t = float(rng.uniform(0.01, 4.0))
        direct = flow_autonomous(field, A, x0, t, rtol=1e-12, atol=1e-14,
                                 method="numeric")
        assert table.flow(x0, t) == pytest.approx(direct, abs=2e-9)


def test_table_threshold_time_matches_event_route(quintic_field, arctan_field):
    from strobomap.flows import spike_time_delta
    for field, A in ((quintic_field, 1.0 / 0.79), (arctan_field, 1.0 / 0.2)):
        table = autonomous_flow(field, A, 1.0)
        event = spike_time_delta(field, A, 1.0, rtol=1e-12, atol=1e-14)
        assert table.delta == pytest.approx(event, abs=1e-10)


def test_table_subthreshold_has_no_crossing(quintic_field):
    table = autonomous_flow(quintic_field, 0.01, 1.0)
    assert table.delta is None
    assert table.time_to_threshold(0.5) is None


def test_equilibrium_tail_extrapolation(arctan_field):
    # long times converge onto the unforced equilibrium from both sides
    table = autonomous_flow(arctan_field, 0.0, 1.0)
    assert table.flow(0.9, 200.0) == pytest.approx(0.1, abs=1e-9)
    assert table.flow(0.0, 200.0) == pytest.approx(0.1, abs=1e-9)


def test_downward_field_at_reset_rejected():
    field = VectorFieldSpec.quintic(-10.0, -0.5, 0.5)  # f(0) < 0
    with pytest.raises(IntegrationFailure):
        autonomous_flow(field, 0.0, 1.0)


def test_engine_window_matches_direct_composition(quintic_field, rng):
    """One forcing window via the engine vs a two-stage direct integration."""
    system = SystemParams(field=quintic_field,
                          forcing=ForcingParams(A=1.0 / 0.79, d=0.5, T=1.0))
    engine = engine_for(system)
    from scipy.integrate import solve_ivp

    def direct(x0):
        theta, A, dT, T = 1.0, 1.0 / 0.79, 0.5, 1.0
        t, x, n = 0.0, x0, 0

        def hit(_t, y):
            return y[0] - theta

        hit.terminal, hit.direction = True, 1.0
        while t < dT - 1e-13:
            sol = solve_ivp(lambda _t, y: quintic_field.f(y) + A, (t, dT), [x],
                            method="DOP853", rtol=1e-12, atol=1e-14, events=hit)
            if sol.t_events[0].size:
                t, x, n = float(sol.t_events[0][0]), 0.0, n + 1
            else:
                t, x = dT, float(sol.y[0, -1])
        sol = solve_ivp(lambda _t, y: quintic_field.f(y), (dT, T), [x],
                        method="DOP853", rtol=1e-12, atol=1e-14)
        return float(sol.y[0, -1]), n

    for _ in range(6):
        x0 = float(rng.uniform(0.0, 1.0))
        x_eng, spikes = engine.window(x0)
        x_dir, n_dir = direct(x0)
        assert len(spikes) == n_dir
        assert x_eng == pytest.approx(x_dir, abs=5e-10)


def test_exact_switch_crossing_counts_as_spike(l1):
    """An initial state whose crossing lands on the switch spikes once."""
    import affine_oracle as oracle
    sigma = oracle.sigma_n(-1.0, 0.5, 0.8, 0.5, 1.9, 1.0, 1)
    engine = engine_for(l1(0.8))
    _, spikes = engine.window(sigma)
    assert len(spikes) == 1
    assert spikes[0] == pytest.approx(0.95, abs=1e-9)
