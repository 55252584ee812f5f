import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smtj_ising.errors import ContractViolation
from smtj_ising.ising import (
    IsingModel,
    energies_of,
    energy,
    enumerate_states,
    flip_probability_up,
    gibbs_distribution,
    ground_states,
    local_field,
    state_index,
)


def direct_energy(J, h, offset, s):
    """Pair-by-pair sum, independent of the matrix form used in the package."""
    n = len(s)
    e = offset
    for i, j in itertools.combinations(range(n), 2):
        e -= J[i][j] * s[i] * s[j]
    return e - sum(h[i] * s[i] for i in range(n))


models = st.integers(2, 10).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2**32 - 1)))


@given(models)
def test_flip_changes_energy_by_twice_spin_times_field(args):
    n, seed = args
    rng = np.random.default_rng(seed)
    m = IsingModel.random(n, rng)
    s = rng.choice([-1, 1], size=n)
    k = int(rng.integers(n))
    t = s.copy()
    t[k] = -t[k]
    assert energy(m, t) - energy(m, s) == pytest.approx(2 * s[k] * local_field(m, s, k), abs=1e-9)


@given(models)
def test_energy_matches_pairwise_sum(args):
    n, seed = args
    rng = np.random.default_rng(seed)
    m = IsingModel.random(n, rng)
    m = IsingModel(m.J, m.h, offset=rng.normal())
    s = rng.choice([-1, 1], size=n)
    assert energy(m, s) == pytest.approx(direct_energy(m.J, m.h, m.offset, s), rel=1e-12, abs=1e-12)


def test_two_spin_ferromagnet():
    m = IsingModel(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2))
    assert energy(m, [1, 1]) == -1.0
    assert energy(m, [1, -1]) == 1.0
    states, emin = ground_states(m)
    assert emin == -1.0
    assert {tuple(s) for s in states} == {(1, 1), (-1, -1)}


def test_zero_model_has_zero_energy_and_half_probability():
    m = IsingModel.zeros(4)
    assert energy(m, [1, -1, 1, 1]) == 0.0
    assert flip_probability_up(local_field(m, [1, -1, 1, 1], 2), 3.0) == 0.5


@pytest.mark.parametrize("L,c", [(0.3, 1.0), (-2.0, 0.7), (5.0, 0.0), (40.0, 10.0), (-40.0, 10.0)])
def test_flip_probability_is_logistic(L, c):
    with np.errstate(over="ignore"):
        expected = 1.0 / (1.0 + np.exp(-2 * c * L))
    assert flip_probability_up(L, c) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_flip_probability_rejects_negative_c():
    with pytest.raises(ContractViolation):
        flip_probability_up(1.0, -0.1)


@pytest.mark.parametrize("J,h,msg", [
    (np.zeros((2, 3)), np.zeros(2), "square"),
    (np.array([[1.0, 0], [0, 0]]), np.zeros(2), "diagonal"),
    (np.array([[0.0, 1.0], [2.0, 0.0]]), np.zeros(2), "symmetric"),
    (np.zeros((3, 3)), np.zeros(2), "length"),
])
def test_model_validation(J, h, msg):
    with pytest.raises(ContractViolation, match=msg):
        IsingModel(J, h)


def test_model_arrays_are_read_only():
    m = IsingModel.zeros(3)
    with pytest.raises(ValueError):
        m.J[0, 1] = 1.0


@pytest.mark.parametrize("s", [[1, 0, 1], [1, 1], [[1, -1, 1]], [2, 1, -1]])
def test_bad_spin_vectors_rejected(s):
    with pytest.raises(ContractViolation):
        energy(IsingModel.zeros(3), s)


def test_local_field_index_checked():
    with pytest.raises(ContractViolation):
        local_field(IsingModel.zeros(3), [1, 1, 1], 3)


def test_enumeration_and_state_index_are_inverse():
    S = enumerate_states(5)
    assert S.shape == (32, 5)
    assert np.array_equal(state_index(S), np.arange(32))


def test_vectorised_energies_agree(rng):
    m = IsingModel.random(6, rng)
    S = enumerate_states(6)
    assert np.allclose(energies_of(m, S), [energy(m, s) for s in S])


def test_gibbs_distribution_normalised_and_ordered(rng):
    m = IsingModel.random(5, rng)
    states, p = gibbs_distribution(m, 1.3)
    assert p.sum() == pytest.approx(1.0)
    E = energies_of(m, states)
    # ratio of probabilities follows exp(-c dE)
    i, j = np.argmin(E), np.argmax(E)
    assert p[i] / p[j] == pytest.approx(np.exp(-1.3 * (E[i] - E[j])))


def test_enumeration_refuses_large_n():
    with pytest.raises(ContractViolation):
        enumerate_states(25)
