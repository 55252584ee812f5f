"""Partition, solve, stitch and sliding-window refinement under a spin budget.

Pipeline stages:

a. recursive balanced bisection of the cities, each bisection an Ising
   problem with one spin per city;
b. an annealed TSP solve inside every group;
c. stitching of the group tours into one closed tour;
d. a rectangular window slid over the map: the tour pieces inside the window
   are cut out, the two longest pieces are closed into a small cycle whose
   joints are held by CTSP edge constraints, and the re-optimised order is
   spliced back when it does not lengthen the tour.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .annealer import RunConfig, Schedule, run, trial_seeds
from .errors import ContractViolation
from .ising import IsingModel
from .tsp import (
    FIXED_START,
    CtspConstraint,
    Tour,
    TspInstance,
    assignment_matrix,
    build_ctsp,
    build_tsp,
    decode,
    default_theta,
    spin_count,
    tour_length,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    groups: tuple
    max_group: int

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(c) for c in g)) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if any(len(g) > self.max_group for g in groups):
            raise ContractViolation("a group exceeds max_group")
        flat = [c for g in groups for c in g]
        if len(flat) != len(set(flat)):
            raise ContractViolation("groups overlap")

    def covers(self, n):
        return sorted(c for g in self.groups for c in g) == list(range(n))


@dataclass(frozen=True)
class Rect:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def contains(self, pts):
        pts = np.asarray(pts)
        return ((pts[..., 0] >= self.x_min) & (pts[..., 0] <= self.x_max)
                & (pts[..., 1] >= self.y_min) & (pts[..., 1] <= self.y_max))

    def shrink(self, factor):
        cx, cy = (self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2
        hw, hh = (self.x_max - self.x_min) * factor / 2, (self.y_max - self.y_min) * factor / 2
        return Rect(cx - hw, cy - hh, cx + hw, cy + hh)


@dataclass(frozen=True)
class WindowPlan:
    rectangles: tuple
    overlap: float


@dataclass(frozen=True)
class PipelineConfig:
    spin_budget: int = 81
    variant: str = FIXED_START
    gp_penalty: float | None = None  # balance weight A; None -> gp_balance * max W
    gp_balance: float = 0.5
    sigma: float | None = None  # similarity scale; None -> mean pairwise distance of the subset
    gp_iterations: int = 5000
    gp_c: tuple = (0.5, 30.0)
    gp_retries: int = 3
    tsp_iterations: int = 10_000
    tsp_c: float = 0.85
    tsp_w_scale: float = 3.8  # w = scale / max d of the group
    tsp_restarts: int = 2
    window_iterations: int = 4000
    window_c: float = 0.7
    window_w_scale: float = 2.5
    window_restarts: int = 1
    window_passes: int = 20
    window_overlap: float = 0.5
    window_shrink: float = 0.85
    window_cities: int | None = 12  # expected cities per rectangle; None -> max_group
    theta: float | None = None
    update_order: str = "sequential_random"
    device_mode: str = "ideal"
    seed: int = 0

    def __post_init__(self):
        if self.spin_budget < 16:
            raise ContractViolation("spin_budget must be >= 16")
        if not 0 <= self.window_overlap < 1:
            raise ContractViolation("window_overlap must be in [0, 1)")

    @property
    def max_group(self):
        return max_group_for_budget(self.spin_budget)

    @property
    def max_window_cities(self):
        return max_cities_for_budget(self.spin_budget, self.variant)

    def replace(self, **kw):
        d = asdict(self)
        d.update(kw)
        return PipelineConfig(**d)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["gp_c"] = tuple(d["gp_c"])
        return cls(**d)


def max_group_for_budget(budget):
    """Largest g with g**2 <= budget."""
    return math.isqrt(budget)


def max_cities_for_budget(budget, variant=FIXED_START):
    m = 3
    while spin_count(m + 1, variant) <= budget:
        m += 1
    return m


class _Ledger:
    """Counts annealing sweeps and the largest sub-problem."""

    def __init__(self, budget):
        self.budget = budget
        self.iterations = 0
        self.spin_updates = 0
        self.max_spins = 0
        self.runs = 0

    def record(self, n_spins, iterations):
        if n_spins > self.budget:
            raise ContractViolation(f"sub-problem with {n_spins} spins exceeds the budget of {self.budget}")
        self.iterations += iterations
        self.spin_updates += iterations * n_spins
        self.max_spins = max(self.max_spins, n_spins)
        self.runs += 1


def _run_config(cfg: PipelineConfig, schedule, seed):
    return RunConfig(schedule=schedule, update_order=cfg.update_order,
                     device_mode=cfg.device_mode, seed=int(seed))


# ---------------------------------------------------------------------------
# (a) graph partitioning

def similarity(d, sigma=None):
    d = np.asarray(d, dtype=np.float64)
    if sigma is None:
        iu = np.triu_indices(len(d), 1)
        sigma = float(d[iu].mean()) if len(iu[0]) else 1.0
        sigma = sigma if sigma > 0 else 1.0
    W = np.exp(-d / sigma)
    np.fill_diagonal(W, 0.0)
    return W


def build_gp_ising(d, W=None, penalty=None, sigma=None, balance=0.5) -> IsingModel:
    """Balanced bisection: H = A (sum s)^2 + sum_{i<j} W_ij (1 - s_i s_j) / 2.

    ``d`` is the distance matrix of the subset; W defaults to exp(-d / sigma)
    and A to ``balance * max W``.  A heavier A pins the sizes harder but
    freezes single-spin dynamics, so the annealer finds worse cuts.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if n < 2:
        raise ContractViolation("graph partitioning needs at least 2 cities")
    W = similarity(d, sigma) if W is None else np.asarray(W, dtype=np.float64)
    A = balance * float(W.max()) if penalty is None else float(penalty)
    J = W / 2.0 - 2.0 * A
    np.fill_diagonal(J, 0.0)
    iu = np.triu_indices(n, 1)
    offset = A * n + float(W[iu].sum()) / 2.0
    return IsingModel(J, np.zeros(n), offset)


def _median_split(pts, idx):
    spread = pts[idx].max(0) - pts[idx].min(0)
    axis = int(np.argmax(spread))
    order = idx[np.argsort(pts[idx, axis], kind="stable")]
    half = len(order) // 2
    return order[:half], order[half:]


def bisect(instance: TspInstance, idx, cfg: PipelineConfig, seed, ledger=None):
    """Split the cities ``idx`` in two; annealed GP when it fits the budget."""
    idx = np.asarray(idx)
    pts = instance.cities
    if len(idx) > cfg.spin_budget and pts is not None:
        log.info("group of %d exceeds the spin budget; median split", len(idx))
        return _median_split(pts, idx)
    d = instance.d[np.ix_(idx, idx)]
    model = build_gp_ising(d, penalty=cfg.gp_penalty, sigma=cfg.sigma, balance=cfg.gp_balance)
    sched = Schedule.linear(cfg.gp_c[0], cfg.gp_c[1], cfg.gp_iterations)
    for attempt, sd in enumerate(trial_seeds(seed, cfg.gp_retries)):
        res = run(model, "random", _run_config(cfg, sched, sd))
        if ledger is not None:
            ledger.record(model.n, res.iterations_run)
        s = res.solution_state
        left, right = idx[s > 0], idx[s < 0]
        if len(left) and len(right):
            return left, right
        log.info("empty side in bisection attempt %d; retrying", attempt)
    if pts is None:
        half = len(idx) // 2
        return idx[:half], idx[half:]
    return _median_split(pts, idx)


def recursive_partition(instance: TspInstance, spin_budget=None, config: PipelineConfig | None = None,
                        ledger=None) -> Partition:
    cfg = config or PipelineConfig()
    if spin_budget is not None:
        cfg = cfg.replace(spin_budget=spin_budget)
    max_group = cfg.max_group
    groups = []
    stack = [(np.arange(instance.n), cfg.seed)]
    while stack:
        idx, sd = stack.pop()
        if len(idx) <= max_group:
            groups.append(idx)
            continue
        left, right = bisect(instance, idx, cfg, sd, ledger)
        s1, s2 = trial_seeds(sd + 1, 2)
        stack.append((right, s2))
        stack.append((left, s1))
    return Partition(tuple(groups), max_group)


# ---------------------------------------------------------------------------
# (b) sub-problem solves

def repair(instance: TspInstance, assignment):
    """Turn a (city, position) +-1 matrix with violations into a tour.

    Cities keep the earliest position they occupy; unplaced cities go in by
    cheapest insertion.
    """
    M = np.asarray(assignment) > 0
    placed = {}
    for j in range(M.shape[1]):
        for i in np.nonzero(M[:, j])[0]:
            placed.setdefault(int(i), j)
    order = sorted(placed, key=lambda c: placed[c])
    d = instance.d
    for c in (c for c in range(instance.n) if c not in placed):
        if len(order) < 2:
            order.append(c)
            continue
        best, at = np.inf, 0
        for k in range(len(order)):
            a, b = order[k], order[(k + 1) % len(order)]
            delta = d[a, c] + d[c, b] - d[a, b]
            if delta < best:
                best, at = delta, k + 1
        order.insert(at, c)
    return order


def anneal_tour(sub: TspInstance, cfg: PipelineConfig, seed, iterations, c_hold, w_scale,
                constraint_pairs=(), initial_order=None, restarts=1, ledger=None, variant=None):
    """Best tour found by annealing the (C)TSP encoding of ``sub``.

    Returns (order, length, valid) where valid reports whether the annealer
    itself produced a constraint-satisfying tour.
    """
    variant = variant or cfg.variant
    dmax = float(sub.d.max())
    w = w_scale / dmax if dmax > 0 else 1.0
    enc = build_tsp(sub, variant, w)
    if constraint_pairs:
        theta = cfg.theta if cfg.theta is not None else default_theta(sub, w)
        enc = build_ctsp(enc, CtspConstraint(tuple(constraint_pairs), theta))
    sched = Schedule.ramp_hold(c_hold, iterations)
    init = "random" if initial_order is None else enc.encode(initial_order)
    best = None
    for sd in trial_seeds(seed, restarts):
        res = run(enc.model, init, _run_config(cfg, sched, sd))
        if ledger is not None:
            ledger.record(enc.model.n, res.iterations_run)
        for state in (res.best_state, res.final_state):
            t = decode(enc, state)
            if isinstance(t, Tour) and all(t.has_edge(a, b) for a, b, *_ in constraint_pairs):
                if best is None or t.length < best.length - 1e-12:
                    best = t
    if best is not None:
        return list(best.order), best.length, True
    if initial_order is not None:
        return list(initial_order), tour_length(sub, initial_order), False
    order = repair(sub, assignment_matrix(enc, res.solution_state))
    return order, tour_length(sub, order), False


def solve_groups(instance, partition: Partition, cfg: PipelineConfig, ledger=None):
    tours = []
    failures = 0
    for g, sd in zip(partition.groups, trial_seeds(cfg.seed + 7, len(partition.groups))):
        g = list(g)
        if len(g) <= 3:
            tours.append(g)
            continue
        sub = instance.subinstance(g)
        order, _, ok = anneal_tour(sub, cfg, sd, cfg.tsp_iterations, cfg.tsp_c, cfg.tsp_w_scale,
                                   restarts=cfg.tsp_restarts, ledger=ledger)
        failures += not ok
        tours.append([g[k] for k in order])
    return tours, failures


# ---------------------------------------------------------------------------
# (c) stitching

def _centroid_cycle(centroids):
    n = len(centroids)
    order = [0]
    left = set(range(1, n))
    while left:
        last = centroids[order[-1]]
        nxt = min(left, key=lambda g: (float(np.hypot(*(centroids[g] - last))), g))
        order.append(nxt)
        left.remove(nxt)
    return order


def _open_paths(tour):
    """Every way to open a closed tour into a path, in both directions."""
    m = len(tour)
    if m == 1:
        return [list(tour)]
    paths = []
    for k in range(m):
        # remove edge (tour[k], tour[k+1]); walk from tour[k+1] around to tour[k]
        p = [tour[(k + 1 + t) % m] for t in range(m)]
        paths.append(p)
        paths.append(p[::-1])
    return paths


def _cycle_dp(d, cands):
    """Cheapest way to chain one open path per group around a fixed group cycle.

    ``cands[g]`` is (paths, internal lengths) for the g-th group on the cycle.
    Returns (total length, chosen path index per group).
    """
    best_total, best_choice = np.inf, None
    G = len(cands)
    for first in range(len(cands[0][0])):
        # DP over the remaining groups with group 0 fixed to candidate `first`
        cost = np.array([cands[0][1][first]])
        back = []
        prev_ends = np.array([cands[0][0][first][-1]])
        for g in range(1, G):
            paths, internal = cands[g]
            starts = np.array([p[0] for p in paths])
            trans = cost[:, None] + d[np.ix_(prev_ends, starts)] + internal[None, :]
            arg = trans.argmin(0)
            back.append(arg)
            cost = trans[arg, np.arange(len(paths))]
            prev_ends = np.array([p[-1] for p in paths])
        close = cost + d[prev_ends, cands[0][0][first][0]]
        k = int(close.argmin())
        if close[k] < best_total - 1e-12:
            choice = [k]
            for arg in reversed(back):
                choice.append(int(arg[choice[-1]]))
            choice.reverse()
            choice[0] = first
            best_total, best_choice = float(close[k]), choice
    return best_total, best_choice


def stitch_groups(instance: TspInstance, partition: Partition, group_tours, improve_order=True) -> Tour:
    """Join group tours into one closed tour.

    Groups are visited along a greedy nearest-centroid cycle.  Each group tour
    is opened at one edge; which edge and which direction is chosen by dynamic
    programming around the cycle so connecting edges plus opened paths are as
    short as possible.  With ``improve_order`` the group cycle is then
    improved by segment reversals (2-opt on groups) scored with the same DP,
    which removes the long crossing links a greedy cycle tends to leave.
    """
    if len(group_tours) != len(partition.groups):
        raise ContractViolation("need one tour per group")
    if len(group_tours) == 1:
        order = list(group_tours[0])
        return Tour(tuple(order), tour_length(instance, order))
    d = instance.d
    pts = instance.cities
    if pts is not None:
        cents = np.array([pts[list(g)].mean(0) for g in partition.groups])
        cyc = _centroid_cycle(cents)
    else:
        cyc = list(range(len(group_tours)))
    cands = {}
    for gi in cyc:
        paths = _open_paths(list(group_tours[gi]))
        cost = [sum(d[p[t], p[t + 1]] for t in range(len(p) - 1)) for p in paths]
        cands[gi] = (paths, np.array(cost))
    total, choice = _cycle_dp(d, [cands[g] for g in cyc])
    G = len(cyc)
    improved = improve_order and G > 3
    while improved:
        improved = False
        for i in range(1, G - 1):
            for j in range(i + 1, G):
                trial = cyc[:i] + cyc[i:j + 1][::-1] + cyc[j + 1:]
                t_total, t_choice = _cycle_dp(d, [cands[g] for g in trial])
                if t_total < total - 1e-9:
                    cyc, total, choice, improved = trial, t_total, t_choice, True
    order = []
    for gi, k in zip(cyc, choice):
        order.extend(cands[gi][0][k])
    return Tour(tuple(int(c) for c in order), tour_length(instance, order))


# ---------------------------------------------------------------------------
# (d) sliding-window CTSP refinement

def window_plan(instance: TspInstance, max_cities, overlap=0.5, phase=0.0) -> WindowPlan:
    """Grid of equal rectangles covering the bounding box.

    Rectangle area is chosen so the expected city count is max_cities; the
    stride is (1 - overlap) of the side, and ``phase`` (a scalar or an
    (x, y) pair in [0, 1)) shifts the grid back by that fraction of a stride.
    """
    pts = instance.cities
    lo, hi = pts.min(0), pts.max(0)
    span = np.maximum(hi - lo, 1e-9)
    frac = min(1.0, max_cities / instance.n)
    side = span * math.sqrt(frac)
    stride = side * (1.0 - overlap)
    rects = []
    start = lo - np.broadcast_to(np.asarray(phase, dtype=np.float64), (2,)) * stride
    nx = int(math.ceil((hi[0] - start[0] - side[0]) / stride[0])) + 1 if side[0] < span[0] else 1
    ny = int(math.ceil((hi[1] - start[1] - side[1]) / stride[1])) + 1 if side[1] < span[1] else 1
    for iy in range(max(ny, 1)):
        for ix in range(max(nx, 1)):
            x0 = start[0] + ix * stride[0]
            y0 = start[1] + iy * stride[1]
            rects.append(Rect(float(x0), float(y0), float(x0 + side[0]), float(y0 + side[1])))
    return WindowPlan(tuple(rects), overlap)


def window_segments(instance: TspInstance, order, rect: Rect):
    """Maximal runs of consecutive in-window cities, as lists in tour order."""
    n = len(order)
    inside = rect.contains(instance.cities[list(order)])
    if inside.all():
        return [list(order)] if n else []
    if not inside.any():
        return []
    k0 = int(np.argmin(inside))  # an outside position to start from
    segs, cur = [], []
    for t in range(1, n + 1):
        k = (k0 + t) % n
        if inside[k]:
            cur.append(order[k])
        elif cur:
            segs.append(cur)
            cur = []
    if cur:
        segs.append(cur)
    return segs


def _path_length(d, seg):
    return float(sum(d[seg[t], seg[t + 1]] for t in range(len(seg) - 1)))


def pick_two_longest(d, segs):
    key = lambda s: (_path_length(d, s), len(s), -min(s))
    return sorted(segs, key=key, reverse=True)[:2]


def _splice(order, seg1, seg2, new_cycle):
    """Rebuild the global tour after re-optimising the cities of seg1 + seg2.

    In the small cycle the joints (seg1 end, seg2 start) and (seg2 end,
    seg1 start) are edges that stand in for the outside paths.
    """
    n = len(order)
    pos = {c: k for k, c in enumerate(order)}
    p1, q1, p2, q2 = seg1[0], seg1[-1], seg2[0], seg2[-1]
    # outside path A: after q1 up to before p2; outside path B: after q2 up to before p1
    def walk(a, b):
        out, k = [], (pos[a] + 1) % n
        while order[k] != b:
            out.append(order[k])
            k = (k + 1) % n
        return out
    outA = walk(q1, p2)
    outB = walk(q2, p1)
    # cut the small cycle at the two joint edges
    m = len(new_cycle)
    cyc = list(new_cycle)
    k = cyc.index(p1)
    cyc = cyc[k:] + cyc[:k]
    if cyc[-1] != q2:
        cyc = [cyc[0]] + cyc[1:][::-1]
    # now cycle starts p1 and ends q2 (joint q2-p1); find the other joint q1-p2
    for t in range(m - 1):
        a, b = cyc[t], cyc[t + 1]
        if {a, b} == {q1, p2}:
            first, second = cyc[:t + 1], cyc[t + 1:]
            break
    else:
        raise ContractViolation("small cycle lost a joint edge")
    # first runs p1 .. (q1 or p2); second runs (p2 or q1) .. q2
    if first[-1] == q1:
        return first + outA + second + outB
    # first = p1 .. p2, second = q1 .. q2: traverse outside path A backwards
    return first + outA[::-1] + second + outB


def window_refine(instance: TspInstance, order, rect: Rect, cfg: PipelineConfig, seed=0, ledger=None):
    """One CTSP window move; returns (new order, info dict)."""
    order = list(order)
    d = instance.d
    base = tour_length(instance, order)
    info = {"changed": False, "cities": 0, "before": base, "after": base}
    limit = cfg.max_window_cities
    for _ in range(30):
        segs = window_segments(instance, order, rect)
        if len(segs) < 2:
            return order, info
        s1, s2 = pick_two_longest(d, segs)
        if len(s1) + len(s2) <= limit:
            break
        rect = rect.shrink(cfg.window_shrink)
    else:
        return order, info
    # keep tour orientation: s1 comes first when walking from order[0]
    pos = {c: k for k, c in enumerate(order)}
    if pos[s2[0]] < pos[s1[0]]:
        s1, s2 = s2, s1
    cities = s1 + s2
    m = len(cities)
    info["cities"] = m
    if m <= 3:
        return order, info
    local = {c: k for k, c in enumerate(cities)}
    sub = instance.subinstance(cities)
    pairs = [(local[s1[-1]], local[s2[0]], "either"), (local[s2[-1]], local[s1[0]], "either")]
    if pairs[0][:2] == pairs[1][:2] or {pairs[0][0], pairs[0][1]} == {pairs[1][0], pairs[1][1]}:
        return order, info
    init = list(range(m))
    sub_order, _, ok = anneal_tour(sub, cfg, seed, cfg.window_iterations, cfg.window_c,
                                   cfg.window_w_scale, constraint_pairs=pairs, initial_order=init,
                                   restarts=cfg.window_restarts, ledger=ledger)
    if not ok:
        return order, info
    new_cycle = [cities[k] for k in sub_order]
    new_order = _splice(order, s1, s2, new_cycle)
    if sorted(new_order) != list(range(instance.n)):
        raise ContractViolation("window splice produced an invalid tour")
    new_len = tour_length(instance, new_order)
    if new_len <= base + 1e-9:
        info.update(changed=new_len < base - 1e-9, after=new_len)
        return new_order, info
    return order, info


# ---------------------------------------------------------------------------
# full pipeline

@dataclass
class StageReport:
    n_cities: int
    groups: list = field(default_factory=list)
    group_lengths: list = field(default_factory=list)
    group_failures: int = 0
    stitched_length: float = 0.0
    pass_lengths: list = field(default_factory=list)
    windows_tried: int = 0
    windows_improved: int = 0
    final_length: float = 0.0
    final_order: list = field(default_factory=list)
    total_iterations: int = 0
    total_spin_updates: int = 0
    max_spins: int = 0
    annealing_runs: int = 0
    validity_checks: int = 0  # tours confirmed to be permutations of all cities

    def to_dict(self):
        return asdict(self)


def _check_tour(instance, order):
    if sorted(order) != list(range(instance.n)):
        raise ContractViolation("pipeline stage produced an invalid tour")
    return 1


def _direct_solve(instance, cfg, ledger):
    order, length, _ = anneal_tour(instance, cfg, cfg.seed, cfg.tsp_iterations, cfg.tsp_c,
                                   cfg.tsp_w_scale, restarts=cfg.tsp_restarts, ledger=ledger)
    return order


def pipeline_run(instance: TspInstance, config: PipelineConfig | None = None, progress=None):
    """Steps (a)-(d); returns (Tour, StageReport)."""
    cfg = config or PipelineConfig()
    ledger = _Ledger(cfg.spin_budget)
    rep = StageReport(instance.n)
    n = instance.n
    if n <= 3:
        order = list(range(n))
    elif n <= cfg.max_group:
        order = _direct_solve(instance, cfg, ledger)
        rep.groups = [list(range(n))]
        rep.group_lengths = [tour_length(instance, order)]
        rep.stitched_length = rep.group_lengths[0]
    else:
        if instance.cities is None:
            raise ContractViolation("the decomposition pipeline needs city coordinates")
        part = recursive_partition(instance, config=cfg, ledger=ledger)
        rep.groups = [list(g) for g in part.groups]
        tours, rep.group_failures = solve_groups(instance, part, cfg, ledger)
        rep.group_lengths = [tour_length(instance.subinstance(t), list(range(len(t)))) if len(t) > 1 else 0.0
                             for t in tours]
        stitched = stitch_groups(instance, part, tours)
        order = list(stitched.order)
        rep.validity_checks += _check_tour(instance, order)
        rep.stitched_length = stitched.length
        seeds = trial_seeds(cfg.seed + 11, max(1, cfg.window_passes))
        for p in range(cfg.window_passes):
            # first pass on the aligned grid, later passes on randomly shifted ones
            phase = (0.0, 0.0) if p == 0 else tuple(np.random.default_rng(seeds[p]).random(2))
            plan = window_plan(instance, cfg.window_cities or cfg.max_group, cfg.window_overlap, phase)
            wseeds = trial_seeds(seeds[p], len(plan.rectangles))
            for rect, sd in zip(plan.rectangles, wseeds):
                order, info = window_refine(instance, order, rect, cfg, sd, ledger)
                rep.validity_checks += _check_tour(instance, order)
                rep.windows_tried += 1
                rep.windows_improved += info["changed"]
            rep.pass_lengths.append(tour_length(instance, order))
            if progress:
                progress(p, rep.pass_lengths[-1])
    rep.final_order = [int(c) for c in order]
    rep.final_length = tour_length(instance, order)
    rep.total_iterations = ledger.iterations
    rep.total_spin_updates = ledger.spin_updates
    rep.max_spins = ledger.max_spins
    rep.annealing_runs = ledger.runs
    return Tour(tuple(rep.final_order), rep.final_length), rep


# ---------------------------------------------------------------------------
# spin-count table

def conventional_spins(n_cities):
    """(N - 1)**2 spins for a fixed-start one-hot encoding of the whole instance."""
    return (n_cities - 1) ** 2


def pipeline_spin_bound(n_cities, spin_budget=81, variant=FIXED_START):
    """Largest sub-problem the pipeline can instantiate for an N-city instance."""
    g = max_group_for_budget(spin_budget)
    if n_cities <= g:
        return spin_count(n_cities, variant) if n_cities >= 3 else 0
    gp = min(n_cities, spin_budget)
    group = spin_count(g, variant)
    window = spin_count(max_cities_for_budget(spin_budget, variant), variant)
    return max(gp, group, window)


def spin_count_report(sizes, spin_budget=81, variant=FIXED_START):
    """Rows of (name, N, conventional, ours) for (name, N) pairs."""
    rows = []
    for name, n in sizes:
        rows.append({"name": name, "n": int(n), "conventional": conventional_spins(n),
                     "ours": pipeline_spin_bound(n, spin_budget, variant)})
    return rows
