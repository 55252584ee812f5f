"""Superparamagnetic tunnel junction emulation.

The steady-state antiparallel (AP) probability follows a sigmoid in the bias
current, ``p_ap = 1 / (1 + exp(-a (I - b)))`` with ``I`` in microamps.  The
switching itself is modelled as a two-state continuous-time Markov chain
(random telegraph noise) whose rates are

    P -> AP : p_ap * 2 / tau0
    AP -> P : (1 - p_ap) * 2 / tau0

so the stationary AP occupancy equals ``p_ap`` and the total fluctuation rate
``2 / tau0`` does not depend on the current.  AP is read as spin +1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CalibrationError, ContractViolation

AP = 1
P = 0

SIGMOID_SLOPE = 4.67  # 1/uA
SIGMOID_CENTER = 3.9  # uA
ITERATION_TIME = 1e-4  # s


@dataclass(frozen=True)
class DeviceParams:
    a: float = SIGMOID_SLOPE
    b: float = SIGMOID_CENTER
    tau0: float = ITERATION_TIME
    r_ap: float = 6.0e3
    r_p: float = 3.0e3

    def __post_init__(self):
        if not self.a > 0:
            raise ContractViolation(f"sigmoid slope must be positive, got {self.a}")
        if not self.tau0 > 0:
            raise ContractViolation(f"tau0 must be positive, got {self.tau0}")
        if not self.r_ap > self.r_p > 0:
            raise ContractViolation("need r_ap > r_p > 0")


def _logistic(x):
    x = np.asarray(x, dtype=np.float64)
    p = 0.5 * (1.0 + np.tanh(0.5 * x))
    return float(p) if p.ndim == 0 else p


def p_ap(params: DeviceParams, current):
    return _logistic(params.a * (np.asarray(current, dtype=np.float64) - params.b))


def current_for_field(params: DeviceParams, L, c):
    """Bias current that makes p_ap equal the Gibbs up-probability for field L.

    I = (2 c / a) L + b
    """
    c = np.asarray(c, dtype=np.float64)
    if np.any(c < 0):
        raise ContractViolation("effective inverse temperature must be >= 0")
    I = (2.0 * c / params.a) * np.asarray(L, dtype=np.float64) + params.b
    return float(I) if I.ndim == 0 else I


def switching_rates(params: DeviceParams, current):
    """Return (rate P->AP, rate AP->P) in 1/s."""
    p = p_ap(params, current)
    total = 2.0 / params.tau0
    return p * total, (1.0 - p) * total


def sample_ideal(params: DeviceParams, current, rng):
    """Memoryless read: AP with probability p_ap(current)."""
    return AP if rng.random() < p_ap(params, current) else P


def relaxation(params: DeviceParams, dt: float) -> float:
    """Weight of the previous state after an interval dt: exp(-2 dt / tau0)."""
    return math.exp(-2.0 * dt / params.tau0)


def telegraph_step(params: DeviceParams, state, current, dt, rng):
    """Advance one device by dt seconds using the exact two-state transition."""
    if not dt > 0:
        raise ContractViolation(f"dt must be positive, got {dt}")
    pi = p_ap(params, current)
    kappa = relaxation(params, dt)
    prob_ap = pi + ((1.0 if state == AP else 0.0) - pi) * kappa
    return AP if rng.random() < prob_ap else P


@dataclass
class TelegraphTrace:
    """Device state samples at increasing times for a fixed bias current."""

    times: np.ndarray
    states: np.ndarray
    current: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.int8)
        if self.times.shape != self.states.shape:
            raise ContractViolation("times and states must have the same length")
        if np.any(np.diff(self.times) <= 0):
            raise ContractViolation("trace times must be strictly increasing")

    def occupancy(self) -> float:
        """Fraction of samples in the AP state."""
        return float(np.mean(self.states == AP))

    def __len__(self):
        return len(self.times)

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# current_uA: {self.current!r}\n")
            w = csv.writer(fh)
            w.writerow(["time_s", "state"])
            for t, st in zip(self.times, self.states):
                w.writerow([repr(float(t)), "AP" if st == AP else "P"])
        return path

    @classmethod
    def from_csv(cls, path):
        current = None
        times, states = [], []
        with Path(path).open() as fh:
            rows = []
            for line in fh:
                if line.startswith("#"):
                    key, _, val = line[1:].partition(":")
                    if key.strip() == "current_uA":
                        current = float(val)
                    continue
                rows.append(line)
        reader = csv.DictReader(rows)
        for row in reader:
            times.append(float(row["time_s"]))
            states.append(AP if row["state"].strip() == "AP" else P)
        if current is None:
            raise ContractViolation(f"{path}: missing '# current_uA:' header")
        return cls(np.array(times), np.array(states), current)


def sampled_trace(params: DeviceParams, current, n_samples, dt, rng, initial=None):
    """Telegraph trace read every dt seconds (vectorised exact propagation)."""
    pi = p_ap(params, current)
    kappa = relaxation(params, dt)
    u = rng.random(n_samples)
    states = np.empty(n_samples, dtype=np.int8)
    st = (AP if rng.random() < pi else P) if initial is None else initial
    for i in range(n_samples):
        st = AP if u[i] < pi + ((1.0 if st == AP else 0.0) - pi) * kappa else P
        states[i] = st
    return TelegraphTrace(dt * np.arange(1, n_samples + 1), states, float(current))


def event_trace(params: DeviceParams, current, duration, rng, initial=None):
    """Exact switching-event trace: one sample per switch (state entered)."""
    up, down = switching_rates(params, current)
    st = (AP if rng.random() < up / (up + down) else P) if initial is None else initial
    times, states = [0.0], [st]
    t = 0.0
    while True:
        rate = down if st == AP else up
        if rate <= 0.0:
            break
        t += rng.exponential(1.0 / rate)
        if t >= duration:
            break
        st = P if st == AP else AP
        times.append(t)
        states.append(st)
    return TelegraphTrace(np.array(times), np.array(states), float(current))


def dwell_times(trace: TelegraphTrace, state=AP):
    """Durations of completed dwells in `state` from an event trace."""
    d = np.diff(trace.times)
    return d[trace.states[:-1] == state]


def calibrate(data, max_iter=100, tol=1e-12) -> DeviceParams:
    """Maximum-likelihood logistic fit of AP occupancy versus current.

    ``data`` holds TelegraphTrace objects or ``(current, fraction[, count])``
    tuples; the latter allow exact-probability inputs.  Returns DeviceParams
    with the fitted ``a`` and ``b``.
    """
    I, y, n = [], [], []
    for item in data:
        if isinstance(item, TelegraphTrace):
            I.append(item.current)
            y.append(item.occupancy())
            n.append(len(item))
        else:
            cur, frac, *rest = item
            I.append(float(cur))
            y.append(float(frac))
            n.append(float(rest[0]) if rest else 1.0)
    I, y, n = (np.asarray(v, dtype=np.float64) for v in (I, y, n))
    if len(np.unique(I)) < 2:
        raise CalibrationError("need at least two distinct currents")
    if np.all(y >= 1.0) or np.all(y <= 0.0):
        raise CalibrationError("all samples in one state; sigmoid is not identifiable")

    X = np.column_stack([np.ones_like(I), I])
    # start from a least-squares fit on clipped logits
    yc = np.clip(y, 1e-3, 1 - 1e-3)
    beta = np.linalg.lstsq(X, np.log(yc / (1 - yc)), rcond=None)[0]
    for _ in range(max_iter):
        p = _logistic(X @ beta)
        W = n * p * (1 - p)
        H = X.T @ (W[:, None] * X)
        g = X.T @ (n * (y - p))
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError as exc:
            raise CalibrationError("singular information matrix") from exc
        beta = beta + step
        if not np.all(np.isfinite(beta)) or abs(beta[1]) > 1e6:
            raise CalibrationError("logistic fit diverged (separable data)")
        if np.max(np.abs(step)) < tol * (1 + np.max(np.abs(beta))):
            break
    alpha, slope = beta
    if slope <= 0:
        raise CalibrationError(f"fitted slope {slope:.3g} is not positive")
    return DeviceParams(a=float(slope), b=float(-alpha / slope))
