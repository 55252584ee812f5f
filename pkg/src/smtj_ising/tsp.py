"""TSP and constrained-TSP Hamiltonians on a city x position spin grid.

Spin s[i, j] = +1 means city i is visited at position j.  The energy is

    sum_i (sum_j s_ij + (N - 2))**2 + sum_j (sum_i s_ij + (N - 2))**2
        + w * sum_j sum_{i,i'} d_ii' x_{i,j} x_{i',j+1}

with x = (s + 1) / 2 and positions taken cyclically.  Both penalty sums
vanish exactly on permutation matrices, so a valid tour has energy
``w * length``.  A constraint that cities A and B be adjacent subtracts
``theta * sum_j (x_Aj x_B,j+1 + x_Bj x_A,j+1)``, which lowers every tour
that uses the edge A-B by exactly theta.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractViolation, UnsupportedInstance
from .ising import IsingModel, as_spins

FULL = "full"
FIXED_START = "fixed_start"


@dataclass(frozen=True)
class TspInstance:
    cities: np.ndarray
    d: np.ndarray
    name: str = "instance"

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        cities = np.asarray(self.cities, dtype=np.float64).reshape(-1, 2) if self.cities is not None else None
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ContractViolation("distance matrix must be square")
        if cities is not None and len(cities) != d.shape[0]:
            raise ContractViolation("coordinate and distance sizes differ")
        if not np.array_equal(d, d.T) or np.any(np.diag(d) != 0) or np.any(d < 0):
            raise ContractViolation("distances must be symmetric, non-negative, zero on the diagonal")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "cities", cities)

    @property
    def n(self):
        return self.d.shape[0]

    @classmethod
    def from_coords(cls, coords, name="instance", rounding=False):
        coords = np.asarray(coords, dtype=np.float64)
        diff = coords[:, None, :] - coords[None, :, :]
        d = np.sqrt((diff**2).sum(-1))
        if rounding:
            d = np.floor(d + 0.5)
        return cls(coords, d, name)

    @classmethod
    def random_uniform(cls, n, rng, name=None):
        """Cities uniform in the unit square (Euclidean, unrounded)."""
        return cls.from_coords(rng.random((n, 2)), name or f"uniform{n}")

    def subinstance(self, idx, name=None):
        idx = np.asarray(idx)
        cities = None if self.cities is None else self.cities[idx]
        return TspInstance(cities, self.d[np.ix_(idx, idx)], name or f"{self.name}[sub{len(idx)}]")


@dataclass(frozen=True)
class Tour:
    order: tuple
    length: float
    closed: bool = True

    def edges(self):
        o = self.order
        return {frozenset((o[k], o[(k + 1) % len(o)])) for k in range(len(o))}

    def has_edge(self, a, b):
        o = self.order
        n = len(o)
        pos = o.index(a)
        return o[(pos + 1) % n] == b or o[(pos - 1) % n] == b


@dataclass(frozen=True)
class Violations:
    """Decoding failure: counts of rows (cities) and columns (positions) not one-hot."""

    row_violations: int
    column_violations: int
    bad_rows: tuple = ()
    bad_columns: tuple = ()

    @property
    def total(self):
        return self.row_violations + self.column_violations


@dataclass(frozen=True)
class CtspConstraint:
    pairs: tuple
    theta: float

    def __post_init__(self):
        pairs = []
        seen = set()
        for p in self.pairs:
            a, b, *rest = p
            direction = rest[0] if rest else "either"
            if direction not in ("either", "a_then_b"):
                raise ContractViolation(f"unknown direction {direction!r}")
            if a == b:
                raise ContractViolation("a constrained pair needs two distinct cities")
            key = (frozenset((a, b)), direction) if direction == "either" else (a, b, direction)
            if key in seen:
                raise ContractViolation(f"duplicate constrained pair {(a, b)}")
            seen.add(key)
            pairs.append((int(a), int(b), direction))
        if not self.theta > 0:
            raise ContractViolation("theta must be positive")
        object.__setattr__(self, "pairs", tuple(pairs))


@dataclass(frozen=True)
class TspEncoding:
    instance: TspInstance
    variant: str
    w: float
    model: IsingModel
    cities: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)
    constraint: CtspConstraint | None = None

    @property
    def n_cities(self):
        return self.instance.n

    def spin_index(self, city, position):
        hit = np.nonzero((self.cities == city) & (self.positions == position))[0]
        if len(hit) != 1:
            raise ContractViolation(f"(city {city}, position {position}) is not a free spin")
        return int(hit[0])

    def decode(self, s):
        return decode(self, s)

    def encode(self, order):
        return encode_tour(self, order)


def default_w(instance: TspInstance) -> float:
    """w = 1 / (2 max d): one edge contributes at most 0.5 energy units."""
    dmax = float(instance.d.max())
    return 0.5 / dmax if dmax > 0 else 0.5


def default_theta(instance: TspInstance, w: float) -> float:
    return 2.0 * w * float(instance.d.max()) + 1.0


def spin_count(n_cities, variant=FIXED_START):
    return n_cities**2 if variant == FULL else (n_cities - 1) ** 2


class _Poly:
    """Quadratic polynomial in +-1 spins: offset + lin.s + sum_{a<b} P_ab s_a s_b."""

    def __init__(self, m):
        self.P = np.zeros((m, m))
        self.lin = np.zeros(m)
        self.offset = 0.0

    def add_square(self, idx, k):
        """(sum_{a in idx} s_a + k)**2"""
        idx = np.asarray(idx)
        self.P[np.ix_(idx, idx)] += 2.0
        self.P[idx, idx] -= 2.0
        self.offset += len(idx) + k * k
        self.lin[idx] += 2.0 * k

    def add_binary_product(self, a, b, coef):
        """coef * x_a * x_b with x = (s + 1)/2; a, b may be arrays of equal shape."""
        q = np.asarray(coef, dtype=np.float64) / 4.0
        np.add.at(self.P, (a, b), q)
        np.add.at(self.P, (b, a), q)
        np.add.at(self.lin, a, q)
        np.add.at(self.lin, b, q)
        self.offset += float(np.sum(q * np.ones(np.broadcast(a, b).shape)))

    def pin(self, fixed, values):
        """Substitute fixed spins and return (P, lin, offset) over the free ones."""
        fixed = np.asarray(fixed)
        values = np.asarray(values, dtype=np.float64)
        free = np.setdiff1d(np.arange(len(self.lin)), fixed)
        Pff = self.P[np.ix_(free, free)]
        lin = self.lin[free] + self.P[np.ix_(free, fixed)] @ values
        Pxx = self.P[np.ix_(fixed, fixed)]
        offset = self.offset + self.lin[fixed] @ values + 0.5 * values @ Pxx @ values
        return free, Pff, lin, offset


def _tsp_poly(d, w):
    N = d.shape[0]
    poly = _Poly(N * N)
    grid = np.arange(N * N).reshape(N, N)  # grid[i, j] = spin of city i at position j
    for i in range(N):
        poly.add_square(grid[i, :], N - 2)
    for j in range(N):
        poly.add_square(grid[:, j], N - 2)
    ii, kk = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    off = ii != kk
    for j in range(N):
        jn = (j + 1) % N
        poly.add_binary_product(grid[ii[off], j], grid[kk[off], jn], w * d[ii[off], kk[off]])
    return poly, grid


def _ctsp_terms(poly, grid, constraint: CtspConstraint):
    N = grid.shape[0]
    j = np.arange(N)
    jn = (j + 1) % N
    for a, b, direction in constraint.pairs:
        poly.add_binary_product(grid[a, j], grid[b, jn], -constraint.theta)
        if direction == "either":
            poly.add_binary_product(grid[b, j], grid[a, jn], -constraint.theta)


def _assemble(instance, variant, w, poly, grid, constraint=None):
    N = instance.n
    cities_full = np.repeat(np.arange(N), N)
    positions_full = np.tile(np.arange(N), N)
    if variant == FULL:
        free, P, lin, offset = np.arange(N * N), poly.P, poly.lin, poly.offset
    else:
        fixed = np.concatenate([grid[0, :], grid[1:, 0]])
        values = np.full(len(fixed), -1.0)
        values[0] = 1.0
        free, P, lin, offset = poly.pin(fixed, values)
    np.fill_diagonal(P, 0.0)
    model = IsingModel(-P, -lin, offset)
    return TspEncoding(instance, variant, float(w), model, cities_full[free], positions_full[free], constraint)


def build_tsp(instance: TspInstance, variant=FIXED_START, w=None) -> TspEncoding:
    if instance.n < 3:
        raise UnsupportedInstance(f"need at least 3 cities, got {instance.n}")
    if variant not in (FULL, FIXED_START):
        raise ContractViolation(f"unknown variant {variant!r}")
    w = default_w(instance) if w is None else float(w)
    if not w > 0:
        raise ContractViolation("w must be positive")
    poly, grid = _tsp_poly(instance.d, w)
    return _assemble(instance, variant, w, poly, grid)


def build_ctsp(encoding: TspEncoding, constraint: CtspConstraint) -> TspEncoding:
    N = encoding.n_cities
    for a, b, _ in constraint.pairs:
        if not (0 <= a < N and 0 <= b < N):
            raise ContractViolation(f"constrained pair ({a}, {b}) names an unknown city")
    poly, grid = _tsp_poly(encoding.instance.d, encoding.w)
    if encoding.constraint is not None:
        _ctsp_terms(poly, grid, encoding.constraint)
    _ctsp_terms(poly, grid, constraint)
    if encoding.constraint is not None:
        constraint = CtspConstraint(encoding.constraint.pairs + constraint.pairs, constraint.theta)
    return _assemble(encoding.instance, encoding.variant, encoding.w, poly, grid, constraint)


def assignment_matrix(encoding: TspEncoding, s):
    """N x N +-1 matrix (city, position) including pinned spins."""
    s = as_spins(s, encoding.model.n)
    N = encoding.n_cities
    M = -np.ones((N, N), dtype=np.int8)
    if encoding.variant == FIXED_START:
        M[0, 0] = 1
    M[encoding.cities, encoding.positions] = s
    return M


def decode(encoding: TspEncoding, s):
    """Tour if every row and column is one-hot, else a Violations report."""
    M = assignment_matrix(encoding, s) > 0
    rows = M.sum(1)
    cols = M.sum(0)
    bad_r = tuple(int(i) for i in np.nonzero(rows != 1)[0])
    bad_c = tuple(int(j) for j in np.nonzero(cols != 1)[0])
    if bad_r or bad_c:
        return Violations(len(bad_r), len(bad_c), bad_r, bad_c)
    order = tuple(int(i) for i in np.argmax(M, axis=0))
    return Tour(order, tour_length(encoding.instance, order))


def encode_tour(encoding: TspEncoding, order):
    """Spin configuration for a tour; fixed-start rotates city 0 to position 0."""
    order = list(order)
    N = encoding.n_cities
    if sorted(order) != list(range(N)):
        raise ContractViolation("order must be a permutation of the cities")
    if encoding.variant == FIXED_START:
        k = order.index(0)
        order = order[k:] + order[:k]
    pos_of = np.empty(N, dtype=np.int64)
    pos_of[order] = np.arange(N)
    return np.where(pos_of[encoding.cities] == encoding.positions, 1, -1).astype(np.int8)


def tour_length(instance: TspInstance, order) -> float:
    order = np.asarray(order, dtype=np.int64)
    if order.ndim != 1 or sorted(order.tolist()) != list(range(instance.n)):
        raise ContractViolation("order must be a permutation of all cities")
    return float(instance.d[order, np.roll(order, -1)].sum())


def brute_force_optimum(instance: TspInstance, required_edges=()):
    """Exhaustive search over tours with city 0 first; for tests and small oracles."""
    N = instance.n
    if N > 11:
        raise ContractViolation("brute force is limited to 11 cities")
    d = instance.d
    best, best_orders = np.inf, []
    for perm in itertools.permutations(range(1, N)):
        if perm[0] > perm[-1]:
            continue  # each undirected cycle once
        order = (0,) + perm
        if required_edges:
            t = Tour(order, 0.0)
            if not all(t.has_edge(a, b) for a, b in required_edges):
                continue
        L = sum(d[order[k], order[(k + 1) % N]] for k in range(N))
        if L < best - 1e-9:
            best, best_orders = L, [order]
        elif abs(L - best) <= 1e-9:
            best_orders.append(order)
    return float(best), best_orders


def coupling_csv(model: IsingModel, path):
    """Write the coupling matrix as (row, col, value) records."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "value"])
        for i in range(model.n):
            for j in range(model.n):
                w.writerow([i, j, repr(float(model.J[i, j]))])
    return path
