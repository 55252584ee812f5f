"""Ising energy model, local fields and single-spin conditional probabilities.

Convention: ``J`` is symmetric with a zero diagonal and every pair is counted
once, so

    H(s) = offset - sum_{i<j} J_ij s_i s_j - sum_i h_i s_i

and flipping spin k changes the energy by exactly ``2 * s_k * L_k`` where
``L_k = sum_j J_kj s_j + h_k`` is the local field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation


@dataclass(frozen=True)
class IsingModel:
    J: np.ndarray
    h: np.ndarray
    offset: float = 0.0
    n: int = field(init=False)

    def __post_init__(self):
        J = np.array(self.J, dtype=np.float64)
        h = np.array(self.h, dtype=np.float64).reshape(-1)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ContractViolation(f"J must be square, got shape {J.shape}")
        if J.shape[0] != h.shape[0]:
            raise ContractViolation(f"J is {J.shape[0]}x{J.shape[0]} but h has length {h.shape[0]}")
        if np.any(np.diag(J) != 0.0):
            raise ContractViolation("J must have a zero diagonal")
        if not np.array_equal(J, J.T):
            if not np.allclose(J, J.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(J).max(initial=0.0)))):
                raise ContractViolation("J must be symmetric")
            J = 0.5 * (J + J.T)
        J.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "n", h.shape[0])

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros((n, n)), np.zeros(n))

    @classmethod
    def random(cls, n, rng, scale=1.0, field_scale=None):
        """Gaussian couplings and fields; handy for tests and Gibbs checks."""
        field_scale = scale if field_scale is None else field_scale
        A = rng.normal(0.0, scale, size=(n, n))
        J = np.triu(A, 1)
        J = J + J.T
        return cls(J, rng.normal(0.0, field_scale, size=n))

    def energy(self, s):
        return energy(self, s)

    def local_field(self, s, k):
        return local_field(self, s, k)

    def local_fields(self, s):
        s = as_spins(s, self.n)
        return self.J @ s + self.h


def as_spins(s, n=None):
    """Validate a spin configuration and return it as an int8 array of +-1."""
    arr = np.asarray(s)
    if arr.ndim != 1:
        raise ContractViolation(f"spin configuration must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ContractViolation(f"expected {n} spins, got {arr.shape[0]}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ContractViolation("spins must be exactly -1 or +1")
    return arr.astype(np.int8, copy=False)


def random_spins(n, rng):
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=n)


def energy(model: IsingModel, s) -> float:
    s = as_spins(s, model.n).astype(np.float64)
    return float(model.offset - 0.5 * s @ model.J @ s - model.h @ s)


def local_field(model: IsingModel, s, k: int) -> float:
    s = as_spins(s, model.n)
    if not 0 <= k < model.n:
        raise ContractViolation(f"spin index {k} out of range for n={model.n}")
    return float(model.J[k] @ s + model.h[k])


def flip_probability_up(L, c):
    """P(s_k = +1 | rest) = 1 / (1 + exp(-2 c L)).

    Works elementwise on arrays; lower-energy orientation is favoured.
    """
    c = np.asarray(c, dtype=np.float64)
    if np.any(c < 0):
        raise ContractViolation("effective inverse temperature must be >= 0")
    x = 2.0 * c * np.asarray(L, dtype=np.float64)
    # logistic via tanh avoids overflow warnings for large |x|
    p = 0.5 * (1.0 + np.tanh(0.5 * x))
    return float(p) if np.ndim(p) == 0 else p


def enumerate_states(n):
    """All 2**n configurations as an int8 array of shape (2**n, n)."""
    if n > 24:
        raise ContractViolation(f"refusing to enumerate 2**{n} states")
    idx = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int8)


def energies_of(model: IsingModel, states) -> np.ndarray:
    S = np.asarray(states, dtype=np.float64)
    return model.offset - 0.5 * np.einsum("ki,ij,kj->k", S, model.J, S) - S @ model.h


def gibbs_distribution(model: IsingModel, c: float):
    """Exact Boltzmann weights exp(-c H) over all 2**n states (n small)."""
    states = enumerate_states(model.n)
    E = energies_of(model, states)
    logw = -c * E
    w = np.exp(logw - logw.max())
    return states, w / w.sum()


def ground_states(model: IsingModel, tol=1e-9):
    """Brute-force minimisers; returns (states, min_energy)."""
    states = enumerate_states(model.n)
    E = energies_of(model, states)
    emin = E.min()
    return states[E <= emin + tol * max(1.0, abs(emin))], float(emin)


def state_index(states) -> np.ndarray:
    """Map +-1 rows to the integer index used by :func:`enumerate_states`."""
    S = (np.asarray(states) > 0).astype(np.int64)
    n = S.shape[-1]
    return S @ (1 << np.arange(n - 1, -1, -1))
