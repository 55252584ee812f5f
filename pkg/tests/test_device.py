import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smtj_ising.device import (
    AP,
    P,
    DeviceParams,
    TelegraphTrace,
    calibrate,
    current_for_field,
    dwell_times,
    event_trace,
    p_ap,
    relaxation,
    sample_ideal,
    sampled_trace,
    switching_rates,
    telegraph_step,
)
from smtj_ising.errors import CalibrationError, ContractViolation
from smtj_ising.ising import flip_probability_up

DEV = DeviceParams()


def test_default_parameters():
    assert (DEV.a, DEV.b, DEV.tau0) == (4.67, 3.9, 1e-4)


def test_half_probability_at_center():
    assert p_ap(DEV, 3.9) == 0.5


@given(st.floats(-20, 20), st.floats(0, 5))
def test_current_mapping_reproduces_gibbs_probability(L, c):
    I = current_for_field(DEV, L, c)
    assert p_ap(DEV, I) == pytest.approx(flip_probability_up(L, c), abs=1e-12)


def test_current_for_field_is_linear():
    assert current_for_field(DEV, 0.0, 2.0) == DEV.b
    assert current_for_field(DEV, 1.0, 1.0) == pytest.approx(2.0 / 4.67 + 3.9)


def test_negative_c_rejected():
    with pytest.raises(ContractViolation):
        current_for_field(DEV, 1.0, -1.0)


@given(st.floats(0, 8))
def test_rates_have_stationary_occupancy_p_ap(I):
    up, down = switching_rates(DEV, I)
    assert up + down == pytest.approx(2.0 / DEV.tau0)
    assert up / (up + down) == pytest.approx(p_ap(DEV, I))


@pytest.mark.parametrize("kw", [dict(a=0.0), dict(tau0=-1.0), dict(r_ap=1e3, r_p=3e3)])
def test_invalid_device_params(kw):
    with pytest.raises(ContractViolation):
        DeviceParams(**kw)


def test_telegraph_step_transition_probability():
    """Exact two-state propagation: P(AP) = pi + (1[AP] - pi) exp(-2 dt / tau0)."""
    rng = np.random.default_rng(0)
    I, dt = 4.1, 0.5e-4
    pi = p_ap(DEV, I)
    k = relaxation(DEV, dt)
    n = 40_000
    from_ap = np.mean([telegraph_step(DEV, AP, I, dt, rng) == AP for _ in range(n)])
    from_p = np.mean([telegraph_step(DEV, P, I, dt, rng) == AP for _ in range(n)])
    tol = 4 * 0.5 / np.sqrt(n)
    assert from_ap == pytest.approx(pi + (1 - pi) * k, abs=tol)
    assert from_p == pytest.approx(pi * (1 - k), abs=tol)


def test_telegraph_step_needs_positive_dt(rng):
    with pytest.raises(ContractViolation):
        telegraph_step(DEV, AP, 3.9, 0.0, rng)


def test_long_step_forgets_the_initial_state(rng):
    assert relaxation(DEV, 1.0) == 0.0
    hits = np.mean([telegraph_step(DEV, P, 5.0, 1.0, rng) == AP for _ in range(5000)])
    assert hits == pytest.approx(p_ap(DEV, 5.0), abs=0.02)


@pytest.mark.parametrize("I", [3.0, 3.9, 4.5])
def test_sampled_trace_occupancy_matches_sigmoid(I):
    tr = sampled_trace(DEV, I, 50_000, DEV.tau0, np.random.default_rng(1))
    assert tr.occupancy() == pytest.approx(p_ap(DEV, I), abs=0.02)


def test_ideal_reads_match_sigmoid(rng):
    reads = [sample_ideal(DEV, 4.2, rng) for _ in range(20_000)]
    assert np.mean(np.array(reads) == AP) == pytest.approx(p_ap(DEV, 4.2), abs=0.015)


def test_event_trace_dwell_times_are_exponential():
    I = 4.3
    tr = event_trace(DEV, I, 5.0, np.random.default_rng(3))
    up, down = switching_rates(DEV, I)
    ap_dwell = dwell_times(tr, AP)
    p_dwell = dwell_times(tr, P)
    assert ap_dwell.mean() == pytest.approx(1 / down, rel=0.05)
    assert p_dwell.mean() == pytest.approx(1 / up, rel=0.05)
    # exponential: standard deviation equals the mean
    assert ap_dwell.std() == pytest.approx(ap_dwell.mean(), rel=0.08)


def test_trace_csv_round_trip(tmp_path):
    tr = sampled_trace(DEV, 3.7, 200, 1e-4, np.random.default_rng(2))
    path = tr.to_csv(tmp_path / "t.csv")
    assert path.read_text().splitlines()[1] == "time_s,state"
    back = TelegraphTrace.from_csv(path)
    assert back.current == 3.7
    assert np.array_equal(back.times, tr.times)
    assert np.array_equal(back.states, tr.states)


def test_trace_requires_increasing_times():
    with pytest.raises(ContractViolation):
        TelegraphTrace(np.array([0.0, 0.0]), np.array([0, 1]), 3.9)


def test_calibrate_recovers_parameters_from_exact_probabilities():
    truth = DeviceParams(a=3.2, b=4.4)
    data = [(I, p_ap(truth, I), 1000) for I in np.linspace(3.5, 5.3, 9)]
    fit = calibrate(data)
    assert fit.a == pytest.approx(3.2, rel=1e-8)
    assert fit.b == pytest.approx(4.4, rel=1e-8)


def test_calibrate_from_traces():
    rng = np.random.default_rng(5)
    traces = [sampled_trace(DEV, I, 20_000, DEV.tau0, rng) for I in np.linspace(3.0, 4.8, 7)]
    fit = calibrate(traces)
    assert fit.a == pytest.approx(4.67, rel=0.05)
    assert fit.b == pytest.approx(3.9, abs=0.02)


@pytest.mark.parametrize("data", [
    [(4.0, 1.0), (4.5, 1.0)],  # all AP
    [(4.0, 0.3), (4.0, 0.7)],  # one current
    [(3.0, 0.0), (4.0, 1.0)],  # separable
    [(3.0, 0.8, 100), (4.0, 0.2, 100)],  # decreasing
])
def test_calibrate_rejects_degenerate_data(data):
    with pytest.raises(CalibrationError):
        calibrate(data)
