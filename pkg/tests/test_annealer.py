import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smtj_ising.annealer import (
    RunConfig,
    RunResult,
    Schedule,
    run,
    sample_states,
    success_curve,
    success_probability,
    sweep,
    trial_seeds,
)
from smtj_ising.errors import ContractViolation
from smtj_ising.ising import IsingModel, energy, gibbs_distribution, ground_states


def empirical_tv(model, c, n_sweeps, config, burn_in=1000):
    _, p = gibbs_distribution(model, c)
    idx = sample_states(model, c, n_sweeps, config, burn_in=burn_in)
    q = np.bincount(idx, minlength=len(p)) / len(idx)
    return 0.5 * np.abs(p - q).sum()


# --- schedules -------------------------------------------------------------

def test_linear_schedule_endpoints():
    v = Schedule.linear(0.1, 2.1, 11).values()
    assert v[0] == 0.1 and v[-1] == pytest.approx(2.1)
    assert np.allclose(np.diff(v), 0.2)


def test_constant_schedule():
    assert np.all(Schedule.constant(0.7, 5).values() == 0.7)


def test_ramp_hold_ramps_then_holds():
    s = Schedule.ramp_hold(0.5, 200, ramp=50)
    v = s.values()
    assert v[0] == 0.0 and v[25] == pytest.approx(0.25) and np.all(v[50:] == 0.5)


@pytest.mark.parametrize("text,first,last", [
    ("constant:0.4", 0.4, 0.4), ("linear:0:3", 0.0, 3.0), ("ramp:0.9", 0.0, 0.9), ("ramp:0.9:10", 0.0, 0.9)])
def test_schedule_parse(text, first, last):
    v = Schedule.parse(text, 100).values()
    assert v[0] == pytest.approx(first) and v[-1] == pytest.approx(last)


@pytest.mark.parametrize("text", ["cosine:1", "linear:1", "constant:x", "ramp"])
def test_schedule_parse_errors(text):
    with pytest.raises(ContractViolation):
        Schedule.parse(text, 10)


@pytest.mark.parametrize("kw", [
    dict(kind="linear", c_start=-1.0), dict(total_iterations=0), dict(kind="piecewise"),
    dict(kind="piecewise", breakpoints=((5, 1.0), (2, 0.0)))])
def test_schedule_validation(kw):
    with pytest.raises(ContractViolation):
        Schedule(**kw)


def test_schedule_dict_round_trip():
    s = Schedule.ramp_hold(0.85, 300, ramp=20)
    assert Schedule.from_dict(s.to_dict()) == s
    assert np.array_equal(s.with_iterations(300).values(), s.values())


def test_run_config_validation():
    with pytest.raises(ContractViolation):
        RunConfig(update_order="random")
    with pytest.raises(ContractViolation):
        RunConfig(device_mode="analog")
    cfg = RunConfig(schedule=Schedule.linear(0, 1, 10), seed=3, device_mode="faithful")
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


# --- sampling --------------------------------------------------------------

@pytest.mark.parametrize("order", ["sequential_random", "sequential_fixed"])
@pytest.mark.parametrize("mode", ["ideal", "faithful"])
def test_sequential_sweeps_sample_the_gibbs_distribution(order, mode):
    m = IsingModel.random(6, np.random.default_rng(4), scale=0.6)
    cfg = RunConfig(update_order=order, device_mode=mode, seed=9)
    assert empirical_tv(m, 1.0, 600_000, cfg) < 0.02


def test_faithful_mode_slower_relaxation_still_stationary():
    """A short iteration interval leaves strong memory but the same stationary law."""
    m = IsingModel.random(5, np.random.default_rng(8), scale=0.5)
    cfg = RunConfig(device_mode="faithful", iteration_interval=2e-5, seed=1)
    assert empirical_tv(m, 1.0, 300_000, cfg) < 0.03


def test_synchronous_updates_are_biased_on_an_antiferromagnet():
    """Parallel updates of coupled spins do not sample the Gibbs law: all spins
    flip together and the chain oscillates."""
    n = 6
    J = np.ones((n, n)) - np.eye(n)
    m = IsingModel(-0.8 * J, np.zeros(n))
    assert empirical_tv(m, 1.0, 100_000, RunConfig(update_order="synchronous", seed=2)) > 0.5
    assert empirical_tv(m, 1.0, 100_000, RunConfig(update_order="sequential_random", seed=2)) < 0.03


def test_zero_c_gives_uniform_states():
    m = IsingModel.random(4, np.random.default_rng(0))
    idx = sample_states(m, 0.0, 64_000, RunConfig(seed=5))
    q = np.bincount(idx, minlength=16) / len(idx)
    assert np.abs(q - 1 / 16).max() < 0.01


def test_sweep_rejects_negative_c(rng):
    m = IsingModel.zeros(3)
    with pytest.raises(ContractViolation):
        sweep(m, [1, 1, 1], -1.0, RunConfig(), rng)


def test_sweep_at_high_c_aligns_with_field(rng):
    m = IsingModel(np.zeros((3, 3)), np.array([2.0, -2.0, 1.0]))
    s = sweep(m, [-1, 1, -1], 50.0, RunConfig(), rng)
    assert list(s) == [1, -1, 1]


def test_device_overrides_shift_the_sigmoid():
    """Lowering a device's centre current b by 2c dh / a acts like an extra field dh."""
    dh, c = 0.5, 1.0
    m = IsingModel(np.zeros((1, 1)), np.array([0.001]))
    cfg = RunConfig(schedule=Schedule.constant(c, 40_000), seed=3, record_trajectory=True)
    res = run(m, "random", cfg, device_b=[3.9 - 2 * c * dh / 4.67])
    up = np.mean([e < 0 for _, _, e, _ in res.trajectory])
    assert up == pytest.approx(1 / (1 + np.exp(-2 * c * (dh + 0.001))), abs=0.01)
    with pytest.raises(ContractViolation):
        run(m, "random", cfg, device_a=[1.0, 2.0])


# --- runs ------------------------------------------------------------------

def small_model(seed=0, n=12):
    return IsingModel.random(n, np.random.default_rng(seed))


@given(st.integers(0, 2**32 - 1), st.sampled_from(["sequential_random", "sequential_fixed", "synchronous"]),
       st.sampled_from(["ideal", "faithful"]))
def test_identical_seeds_reproduce_runs(seed, order, mode):
    m = small_model(1)
    cfg = RunConfig(schedule=Schedule.linear(0.1, 3, 50), update_order=order, device_mode=mode,
                    seed=seed, record_trajectory=True)
    a, b = run(m, "random", cfg), run(m, "random", cfg)
    assert a.to_dict() == b.to_dict()


@given(st.integers(0, 2**32 - 1))
def test_two_memory_rule(seed):
    m = small_model(2)
    res = run(m, "random", RunConfig(schedule=Schedule.linear(0.0, 2.0, 60), seed=seed))
    assert res.solution_energy == min(res.best_energy, res.final_energy)
    assert res.best_energy <= res.final_energy
    assert res.best_energy == pytest.approx(energy(m, res.best_state))
    assert res.final_energy == pytest.approx(energy(m, res.final_state))
    assert energy(m, res.solution_state) == res.solution_energy


def test_best_energy_matches_trajectory_minimum():
    m = small_model(3)
    res = run(m, "random", RunConfig(schedule=Schedule.linear(0.0, 1.0, 300), seed=4, record_trajectory=True))
    E = np.array([e for _, _, e, _ in res.trajectory])
    best = np.array([b for _, _, _, b in res.trajectory])
    assert np.allclose(best, np.minimum.accumulate(np.minimum(E, best[0])))
    assert res.best_energy == pytest.approx(min(E.min(), energy(m, res.best_state)))
    assert [t for t, *_ in res.trajectory] == list(range(300))


def test_trajectory_stride_and_block_boundaries():
    m = small_model(3)
    cfg = RunConfig(schedule=Schedule.constant(1.0, 1000), seed=4, record_trajectory=True, trajectory_stride=7)
    a = run(m, "random", cfg, block=64)
    b = run(m, "random", cfg, block=64)
    assert [t for t, *_ in a.trajectory] == list(range(0, 1000, 7))
    assert a.to_dict() == b.to_dict()


def test_initial_state_is_used():
    m = small_model(0, n=4)
    s0 = np.array([1, 1, -1, 1], dtype=np.int8)
    res = run(m, s0, RunConfig(schedule=Schedule.constant(0.0, 1), seed=0))
    assert res.best_energy <= energy(m, s0)
    with pytest.raises(ContractViolation):
        run(m, "zeros", RunConfig())


def test_annealing_finds_ground_state_of_small_model():
    m = small_model(7, n=10)
    _, emin = ground_states(m)
    res = run(m, "random", RunConfig(schedule=Schedule.linear(0.1, 5.0, 3000), seed=1), target_energy=emin)
    assert res.solution_energy == pytest.approx(emin)
    assert res.first_hit_iteration is not None and res.first_hit_iteration < 3000


def test_run_result_round_trip():
    res = run(small_model(), "random", RunConfig(schedule=Schedule.constant(1, 20), record_trajectory=True))
    back = RunResult.from_dict(res.to_dict())
    assert back.to_dict() == res.to_dict()


def test_trial_seeds_are_distinct_and_deterministic():
    a = trial_seeds(7, 50)
    assert a == trial_seeds(7, 50) and len(set(a)) == 50
    assert a != trial_seeds(8, 50)


def test_success_probability_and_curve():
    m = small_model(7, n=10)
    _, emin = ground_states(m)
    cfg = RunConfig(schedule=Schedule.linear(0.1, 5.0, 2000), seed=11)
    p, results = success_probability(m, emin, 10, cfg, return_results=True)
    assert p == 1.0
    curve = success_curve(results, [0, 2000])
    assert curve[-1] == (2000, 1.0)
    assert curve[0][1] <= 1.0
    assert success_probability(m, emin - 1.0, 3, cfg) == 0.0
    assert success_probability(lambda sd: m, emin, 3, cfg, is_success=lambda r: True) == 1.0
    with pytest.raises(ContractViolation):
        success_probability(m, emin, 0, cfg)
