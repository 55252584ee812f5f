"""Global annealing of an Ising model through emulated SMTJ spins.

One iteration is one sweep over all spins.  For every spin the local field
is turned into a bias current, the device is read, and the read state becomes
the new spin value.  The runner keeps two memories, the lowest-energy state
seen and the final state, and reports the lower of the two.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numba as nb
import numpy as np

from .device import DeviceParams, relaxation
from .errors import ContractViolation
from .ising import IsingModel, as_spins, random_spins

UPDATE_ORDERS = ("sequential_random", "sequential_fixed", "synchronous")
DEVICE_MODES = ("ideal", "faithful")

DEFAULT_RAMP = 50
DEFAULT_HOLD_C = 0.5


@dataclass(frozen=True)
class Schedule:
    kind: str = "constant"
    c_start: float = DEFAULT_HOLD_C
    c_end: float = DEFAULT_HOLD_C
    total_iterations: int = 1000
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "piecewise"):
            raise ContractViolation(f"unknown schedule kind {self.kind!r}")
        if self.total_iterations < 1:
            raise ContractViolation("total_iterations must be >= 1")
        if self.c_start < 0 or self.c_end < 0:
            raise ContractViolation("c values must be >= 0")
        bps = tuple((int(t), float(c)) for t, c in self.breakpoints)
        if self.kind == "piecewise":
            if not bps:
                raise ContractViolation("piecewise schedule needs breakpoints")
            its = [t for t, _ in bps]
            if its != sorted(its):
                raise ContractViolation("breakpoints must be sorted by iteration")
            if any(c < 0 for _, c in bps):
                raise ContractViolation("c values must be >= 0")
        object.__setattr__(self, "breakpoints", bps)

    @classmethod
    def constant(cls, c, total_iterations):
        return cls("constant", c, c, total_iterations)

    @classmethod
    def linear(cls, c_start, c_end, total_iterations):
        return cls("linear", c_start, c_end, total_iterations)

    @classmethod
    def ramp_hold(cls, c_hold=DEFAULT_HOLD_C, total_iterations=10_000, ramp=DEFAULT_RAMP, c0=0.0):
        """Quick linear ramp from c0 to c_hold, then hold (the default for TSP solves)."""
        ramp = max(1, min(ramp, total_iterations - 1)) if total_iterations > 1 else 0
        bps = ((0, c0), (ramp, c_hold)) if ramp else ((0, c_hold),)
        return cls("piecewise", c0, c_hold, total_iterations, bps)

    def values(self) -> np.ndarray:
        """c for every iteration t = 0 .. total_iterations - 1."""
        T = self.total_iterations
        t = np.arange(T, dtype=np.float64)
        if self.kind == "constant":
            return np.full(T, self.c_start)
        if self.kind == "linear":
            if T == 1:
                return np.array([self.c_start])
            return self.c_start + (self.c_end - self.c_start) * t / (T - 1)
        its = np.array([b[0] for b in self.breakpoints], dtype=np.float64)
        cs = np.array([b[1] for b in self.breakpoints])
        return np.interp(t, its, cs)

    def c_at(self, t: int) -> float:
        return float(self.values()[t])

    def with_iterations(self, total_iterations):
        if self.kind == "piecewise":
            ramp = self.breakpoints[1][0] if len(self.breakpoints) > 1 else 0
            if len(self.breakpoints) <= 2:
                return Schedule.ramp_hold(self.c_end, total_iterations, ramp, self.breakpoints[0][1])
        return Schedule(self.kind, self.c_start, self.c_end, total_iterations, self.breakpoints)

    def to_dict(self):
        d = asdict(self)
        d["breakpoints"] = [list(b) for b in self.breakpoints]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["breakpoints"] = tuple(tuple(b) for b in d.get("breakpoints", ()))
        return cls(**d)

    @classmethod
    def parse(cls, text, total_iterations):
        """Parse ``constant:C``, ``linear:C0:C1`` or ``ramp:C[:R]``."""
        kind, *vals = text.split(":")
        try:
            nums = [float(v) for v in vals]
        except ValueError as exc:
            raise ContractViolation(f"bad schedule {text!r}") from exc
        if kind == "constant" and len(nums) == 1:
            return cls.constant(nums[0], total_iterations)
        if kind == "linear" and len(nums) == 2:
            return cls.linear(nums[0], nums[1], total_iterations)
        if kind == "ramp" and len(nums) in (1, 2):
            ramp = int(nums[1]) if len(nums) == 2 else DEFAULT_RAMP
            return cls.ramp_hold(nums[0], total_iterations, ramp)
        raise ContractViolation(f"bad schedule {text!r}; use constant:C, linear:C0:C1 or ramp:C[:R]")


@dataclass(frozen=True)
class RunConfig:
    schedule: Schedule = field(default_factory=lambda: Schedule.ramp_hold(total_iterations=1000))
    update_order: str = "sequential_random"
    device_mode: str = "ideal"
    iteration_interval: float = 1e-4
    seed: int = 0
    record_trajectory: bool = False
    trajectory_stride: int = 1
    device: DeviceParams = field(default_factory=DeviceParams)

    def __post_init__(self):
        if self.update_order not in UPDATE_ORDERS:
            raise ContractViolation(f"update_order must be one of {UPDATE_ORDERS}")
        if self.device_mode not in DEVICE_MODES:
            raise ContractViolation(f"device_mode must be one of {DEVICE_MODES}")
        if self.trajectory_stride < 1:
            raise ContractViolation("trajectory_stride must be >= 1")
        if self.device_mode == "faithful" and not self.iteration_interval > 0:
            raise ContractViolation("iteration_interval must be positive")

    def replace(self, **kw):
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return RunConfig(**d)

    def to_dict(self):
        return {
            "schedule": self.schedule.to_dict(),
            "update_order": self.update_order,
            "device_mode": self.device_mode,
            "iteration_interval": self.iteration_interval,
            "seed": self.seed,
            "record_trajectory": self.record_trajectory,
            "trajectory_stride": self.trajectory_stride,
            "device": asdict(self.device),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["schedule"] = Schedule.from_dict(d["schedule"])
        d["device"] = DeviceParams(**d.get("device", {}))
        return cls(**d)


@dataclass
class RunResult:
    best_state: np.ndarray
    best_energy: float
    final_state: np.ndarray
    final_energy: float
    solution_energy: float
    iterations_run: int
    first_hit_iteration: int | None
    trajectory: list
    seed: int

    @property
    def solution_state(self):
        return self.best_state if self.best_energy <= self.final_energy else self.final_state

    def to_dict(self, include_states=True):
        d = {
            "best_energy": self.best_energy,
            "final_energy": self.final_energy,
            "solution_energy": self.solution_energy,
            "iterations_run": self.iterations_run,
            "first_hit_iteration": self.first_hit_iteration,
            "seed": self.seed,
            "trajectory": [list(row) for row in self.trajectory],
        }
        if include_states:
            d["best_state"] = self.best_state.astype(int).tolist()
            d["final_state"] = self.final_state.astype(int).tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            best_state=np.array(d["best_state"], dtype=np.int8),
            best_energy=d["best_energy"],
            final_state=np.array(d["final_state"], dtype=np.int8),
            final_energy=d["final_energy"],
            solution_energy=d["solution_energy"],
            iterations_run=d["iterations_run"],
            first_hit_iteration=d["first_hit_iteration"],
            trajectory=[tuple(r) for r in d["trajectory"]],
            seed=d["seed"],
        )


# --------------------------------------------------------------------------
# numba kernel

_ORDER_CODE = {"sequential_random": 0, "sequential_fixed": 1, "synchronous": 2}


@nb.njit(cache=True)
def _sweeps(J, h, offset, a0, b0, a, b, s, F, cs, order, kappa, U, Uperm,
            best_s, best_e, target, first_hit, t0, energies, best_energies,
            weights, state_idx):
    """Run len(cs) sweeps in place.

    The drive current is set from the nominal device (a0, b0); spin k's device
    answers with its own (a[k], b[k]), so overrides model device mismatch.
    F holds J @ s + h and is kept in sync.  U[t, k] drives the device read of
    spin k in sweep t; Uperm[t] drives the Fisher-Yates shuffle when order == 0.
    When state_idx is non-empty the visited state's bit index is written there.
    Returns (best_e, first_hit).
    """
    record = state_idx.shape[0] > 0
    n = s.shape[0]
    perm = np.arange(n)
    new = np.empty(n, dtype=np.int8)
    for t in range(cs.shape[0]):
        c = cs[t]
        if order == 0:
            for i in range(n):
                perm[i] = i
            for i in range(n - 1, 0, -1):
                j = int(Uperm[t, i] * (i + 1))
                if j > i:
                    j = i
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
        if order == 2:
            for k in range(n):
                cur = b0 + (2.0 * c / a0) * F[k]
                p = 1.0 / (1.0 + math.exp(-a[k] * (cur - b[k])))
                if kappa > 0.0:
                    prev = 1.0 if s[k] > 0 else 0.0
                    p = p + (prev - p) * kappa
                new[k] = 1 if U[t, k] < p else -1
            for k in range(n):
                if new[k] != s[k]:
                    d = float(new[k] - s[k])
                    s[k] = new[k]
                    for m in range(n):
                        F[m] += J[m, k] * d
        else:
            for i in range(n):
                k = perm[i] if order == 0 else i
                cur = b0 + (2.0 * c / a0) * F[k]
                p = 1.0 / (1.0 + math.exp(-a[k] * (cur - b[k])))
                if kappa > 0.0:
                    prev = 1.0 if s[k] > 0 else 0.0
                    p = p + (prev - p) * kappa
                sk = 1 if U[t, k] < p else -1
                if sk != s[k]:
                    d = float(sk - s[k])
                    s[k] = sk
                    for m in range(n):
                        F[m] += J[m, k] * d
        if record:
            idx = 0
            for k in range(n):
                if s[k] > 0:
                    idx += weights[k]
            state_idx[t] = idx
        e = 0.0
        for k in range(n):
            e += s[k] * (F[k] + h[k])
        e = offset - 0.5 * e
        energies[t] = e
        if e < best_e:
            best_e = e
            for k in range(n):
                best_s[k] = s[k]
        best_energies[t] = best_e
        if first_hit < 0 and e <= target:
            first_hit = t0 + t
    return best_e, first_hit


_NO_WEIGHTS = np.zeros(0, dtype=np.int64)
_NO_INDEX = np.zeros(0, dtype=np.int64)


def _device_arrays(model: IsingModel, device: DeviceParams, a=None, b=None):
    a = np.full(model.n, device.a) if a is None else np.asarray(a, dtype=np.float64)
    b = np.full(model.n, device.b) if b is None else np.asarray(b, dtype=np.float64)
    if a.shape != (model.n,) or b.shape != (model.n,):
        raise ContractViolation("per-spin device overrides must have length n")
    return a, b


def _kappa(config: RunConfig):
    if config.device_mode == "faithful":
        return relaxation(config.device, config.iteration_interval)
    return 0.0


def _draw(rng, n_sweeps, n, order):
    U = rng.random((n_sweeps, n))
    Uperm = rng.random((n_sweeps, n)) if order == 0 else np.empty((1, 1))
    return U, Uperm


def sweep(model: IsingModel, s, c, config: RunConfig, rng, device_a=None, device_b=None):
    """One iteration over all spins at inverse temperature c; returns the new state."""
    s = np.array(as_spins(s, model.n), dtype=np.int8)
    if c < 0:
        raise ContractViolation("c must be >= 0")
    a, b = _device_arrays(model, config.device, device_a, device_b)
    order = _ORDER_CODE[config.update_order]
    F = model.J @ s + model.h
    U, Uperm = _draw(rng, 1, model.n, order)
    dev = config.device
    _sweeps(model.J, model.h, model.offset, dev.a, dev.b, a, b, s, F, np.array([float(c)]), order,
            _kappa(config), U, Uperm, s.copy(), np.inf, -np.inf, -1, 0,
            np.empty(1), np.empty(1), _NO_WEIGHTS, _NO_INDEX)
    return s


def sample_states(model: IsingModel, c, n_sweeps, config: RunConfig, initial=None,
                  burn_in=0, block=65536):
    """Sample at fixed c; returns the visited state index after every sweep.

    State indices follow :func:`smtj_ising.ising.enumerate_states`, so this is
    only meant for small n.
    """
    if model.n > 62:
        raise ContractViolation("state indices need n <= 62")
    rng = np.random.default_rng(config.seed)
    s = random_spins(model.n, rng) if initial is None else np.array(as_spins(initial, model.n))
    a, b = _device_arrays(model, config.device)
    order = _ORDER_CODE[config.update_order]
    kappa = _kappa(config)
    weights = (1 << np.arange(model.n - 1, -1, -1)).astype(np.int64)
    out = np.empty(burn_in + n_sweeps, dtype=np.int64)
    best_s = s.copy()
    done = 0
    while done < len(out):
        m = min(block, len(out) - done)
        U, Uperm = _draw(rng, m, model.n, order)
        F = model.J @ s + model.h
        scratch = np.empty(m)
        _sweeps(model.J, model.h, model.offset, config.device.a, config.device.b, a, b, s, F,
                np.full(m, float(c)), order, kappa,
                U, Uperm, best_s, np.inf, -np.inf, -1, 0, scratch, scratch,
                weights, out[done:done + m])
        done += m
    return out[burn_in:]


def run(model: IsingModel, initial, config: RunConfig, target_energy=None,
        device_a=None, device_b=None, block=4096) -> RunResult:
    """Anneal for schedule.total_iterations sweeps.

    ``initial`` is a spin configuration or the string ``"random"``.  If
    ``target_energy`` is given, ``first_hit_iteration`` records the first
    iteration whose energy is within 1e-9 of it (or below).  ``device_a`` and
    ``device_b`` give per-spin device parameters; currents are still computed
    from the nominal ``config.device``.
    """
    rng = np.random.default_rng(config.seed)
    if isinstance(initial, str):
        if initial != "random":
            raise ContractViolation(f"unknown initial state {initial!r}")
        s = random_spins(model.n, rng)
    else:
        s = np.array(as_spins(initial, model.n), dtype=np.int8)
    a, b = _device_arrays(model, config.device, device_a, device_b)
    order = _ORDER_CODE[config.update_order]
    kappa = _kappa(config)
    cs_all = config.schedule.values()
    T = len(cs_all)
    target = -np.inf if target_energy is None else target_energy + 1e-9 * max(1.0, abs(target_energy))

    best_s = s.copy()
    best_e = model.energy(s)
    first_hit = 0 if best_e <= target else -1
    trajectory = []
    J, h = model.J, model.h
    block = max(1, min(block, max(1, 2_000_000 // max(model.n, 1))))
    t0 = 0
    while t0 < T:
        m = min(block, T - t0)
        cs = cs_all[t0:t0 + m]
        U, Uperm = _draw(rng, m, model.n, order)
        F = J @ s + h  # refresh to keep round-off from accumulating
        energies = np.empty(m)
        bests = np.empty(m)
        best_e, first_hit = _sweeps(J, h, model.offset, config.device.a, config.device.b, a, b, s, F,
                                    cs, order, kappa, U, Uperm,
                                    best_s, best_e, target, first_hit, t0, energies, bests,
                                    _NO_WEIGHTS, _NO_INDEX)
        if config.record_trajectory:
            stride = config.trajectory_stride
            for k in range((-t0) % stride, m, stride):
                trajectory.append((t0 + k, float(cs[k]), float(energies[k]), float(bests[k])))
        t0 += m

    final_e = model.energy(s)
    best_e = model.energy(best_s)
    if final_e < best_e:
        best_e, best_s = final_e, s.copy()
    return RunResult(
        best_state=best_s,
        best_energy=best_e,
        final_state=s,
        final_energy=final_e,
        solution_energy=min(best_e, final_e),
        iterations_run=T,
        first_hit_iteration=None if first_hit < 0 else int(first_hit),
        trajectory=trajectory,
        seed=config.seed,
    )


def trial_seeds(seed, trials):
    """Independent per-trial seeds derived from one master seed."""
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> 1) for c in ss.spawn(trials)]


def success_probability(model, target_energy, trials, config: RunConfig, tol=1e-9,
                        initial="random", return_results=False, is_success=None):
    """Fraction of independently seeded runs whose solution reaches target_energy.

    ``model`` may be an IsingModel or a callable ``seed -> IsingModel``.
    ``is_success(result)`` overrides the energy test, e.g. to require that the
    solution decodes to a valid optimal tour.
    """
    if trials < 1:
        raise ContractViolation("trials must be >= 1")
    results = []
    hits = 0
    for sd in trial_seeds(config.seed, trials):
        m = model(sd) if callable(model) else model
        res = run(m, initial, config.replace(seed=sd), target_energy=target_energy)
        if is_success is not None:
            ok = is_success(res)
        else:
            ok = res.solution_energy <= target_energy + tol * max(1.0, abs(target_energy))
        hits += bool(ok)
        results.append(res)
    p = hits / trials
    return (p, results) if return_results else p


def success_curve(results: Sequence[RunResult], checkpoints) -> list:
    """Success fraction by iteration t, from first_hit_iteration of each run."""
    hits = np.array([np.inf if r.first_hit_iteration is None else r.first_hit_iteration for r in results])
    return [(int(t), float(np.mean(hits <= t))) for t in checkpoints]
