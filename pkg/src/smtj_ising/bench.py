"""Experiment harness: the runs behind the command line, returning artifacts.

Every experiment is deterministic given its seed and writes a JSON artifact
(plus CSV side-files) from which it can be re-run.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import tsplib
from .annealer import RunConfig, Schedule, run, success_curve, trial_seeds
from .decomposition import PipelineConfig, pipeline_run, spin_count_report
from .device import DeviceParams, TelegraphTrace, calibrate, p_ap, sampled_trace
from .errors import ContractViolation
from .tsp import (
    FIXED_START,
    FULL,
    CtspConstraint,
    Tour,
    TspInstance,
    brute_force_optimum,
    build_ctsp,
    build_tsp,
    decode,
    default_theta,
    spin_count,
)

log = logging.getLogger(__name__)

OUT_ENV = "SMTJ_ISING_OUT"
KINDS = ("solve_tsp", "solve_ctsp", "pipeline", "success_curve", "device_trace", "spin_report", "calibrate")

# Tuned settings for direct solves of small instances (w in units of 1 / max d).
TSP_W_SCALE = 3.8
TSP_HOLD_C = 0.85
CTSP_W_SCALE = 2.5
CTSP_HOLD_C = 0.7
SUCCESS_CHECKPOINTS = (10, 30, 100, 300, 1000, 3000, 10_000)


def default_out_dir():
    return Path(os.environ.get(OUT_ENV, "runs"))


@dataclass
class ExperimentSpec:
    kind: str
    instance: str | None = None  # TSPLIB path or bundled name
    n: int | None = None  # synthetic instance size when no instance is given
    seed: int = 0
    iterations: int | None = None
    schedule: str | None = None
    w: float | None = None
    theta: float | None = None
    budget: int | None = None
    trials: int = 1
    mode: str = "ideal"
    variant: str = FIXED_START
    pairs: tuple = ()
    sizes: tuple = ()
    currents: tuple = (3.0, 3.9, 5.0)
    samples: int = 20_000
    inputs: tuple = ()
    overrides: dict = field(default_factory=dict)
    out_dir: Path | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown experiment kind {self.kind!r}")
        self.out_dir = Path(self.out_dir) if self.out_dir is not None else default_out_dir()

    def to_dict(self):
        d = asdict(self)
        d["out_dir"] = str(self.out_dir)
        return d


@dataclass
class ExperimentResult:
    summary: dict
    artifacts: list
    ok: bool = True


def synthetic_instance(n, seed):
    """Uniform cities in the unit square drawn from the experiment seed."""
    if n is None or n < 3:
        raise ContractViolation("a synthetic instance needs --n >= 3")
    return TspInstance.random_uniform(n, np.random.default_rng(seed), name=f"uniform{n}_seed{seed}")


def load(spec: ExperimentSpec) -> TspInstance:
    if spec.instance:
        return tsplib.load_instance(spec.instance)
    return synthetic_instance(spec.n, spec.seed)


def _schedule(spec, default_c, default_iters):
    iters = spec.iterations or default_iters
    if spec.schedule:
        return Schedule.parse(spec.schedule, iters)
    return Schedule.ramp_hold(default_c, iters)


def _w(spec, inst, scale):
    if spec.w is not None:
        if not spec.w > 0:
            raise ContractViolation("--w must be positive")
        return spec.w
    return scale / float(inst.d.max())


def _describe(t):
    if isinstance(t, Tour):
        return {"valid": True, "length": t.length, "order": list(t.order)}
    return {"valid": False, "row_violations": t.row_violations, "column_violations": t.column_violations}


def _write(spec, name, doc, trajectories=None):
    path = spec.out_dir / f"{name}.json"
    doc = {"spec": spec.to_dict(), **doc}
    return tsplib.write_run_artifact(doc, path, trajectories)


def _direct(spec: ExperimentSpec, constrained: bool) -> ExperimentResult:
    inst = load(spec)
    spins = spin_count(inst.n, spec.variant)
    if spec.budget is not None and spins > spec.budget:
        raise ContractViolation(
            f"{inst.name} needs {spins} spins in the {spec.variant} encoding but the budget is "
            f"{spec.budget}; use the pipeline command for budgeted solves")
    scale, c = (CTSP_W_SCALE, CTSP_HOLD_C) if constrained else (TSP_W_SCALE, TSP_HOLD_C)
    w = _w(spec, inst, scale)
    enc = build_tsp(inst, spec.variant, w)
    pairs = tuple(tuple(p) for p in spec.pairs)
    if constrained:
        if not pairs:
            raise ContractViolation("solve-ctsp needs at least one --pair")
        theta = spec.theta if spec.theta is not None else default_theta(inst, w)
        enc = build_ctsp(enc, CtspConstraint(pairs, theta))
    sched = _schedule(spec, c, 10_000)
    cfg = RunConfig(schedule=sched, device_mode=spec.mode, seed=spec.seed, record_trajectory=True,
                    trajectory_stride=max(1, sched.total_iterations // 1000))
    best = None
    runs = []
    for k, sd in enumerate(trial_seeds(spec.seed, max(1, spec.trials))):
        res = run(enc.model, "random", cfg.replace(seed=sd))
        bt, ft = decode(enc, res.best_state), decode(enc, res.final_state)
        runs.append({"seed": sd, "best": _describe(bt), "final": _describe(ft),
                     "best_energy": res.best_energy, "final_energy": res.final_energy,
                     "solution_energy": res.solution_energy})
        for t in (bt, ft):
            if isinstance(t, Tour) and (not constrained or all(t.has_edge(a, b) for a, b, *_ in pairs)):
                if best is None or t.length < best.length:
                    best = t
        if k == 0:
            first = res
    summary = {
        "instance": inst.name, "n": inst.n, "spins": enc.model.n, "w": w,
        "theta": enc.constraint.theta if enc.constraint else None,
        "best_length": None if best is None else best.length,
        "best_order": None if best is None else list(best.order),
        "runs": runs,
    }
    name = "solve_ctsp" if constrained else "solve_tsp"
    path = _write(spec, name, {"summary": summary, "run_config": cfg.to_dict(),
                               "first_run": first.to_dict(include_states=True) | {"trajectory": []}},
                  {"run0": first.trajectory})
    return ExperimentResult(summary, [path, *path.parent.glob(f"{name}_run0_trajectory.csv")], best is not None)


def success_experiment(n, trials, iterations, seed, w_scale=TSP_W_SCALE, c_hold=TSP_HOLD_C,
                       variant=FULL, mode="ideal", update_order="sequential_random",
                       checkpoints=SUCCESS_CHECKPOINTS, schedule=None, w=None):
    """Success probability of finding the optimal tour of a seeded n-city instance.

    A trial succeeds when its solution state decodes to a tour of optimal
    length (checked against exhaustive search).  The curve uses the first
    iteration whose energy reaches w * L_opt; for w < 4 / max d only optimal
    tours have that energy.
    """
    inst = synthetic_instance(n, seed)
    L_opt, opt_orders = brute_force_optimum(inst)
    w = w_scale / float(inst.d.max()) if w is None else float(w)
    enc = build_tsp(inst, variant, w)
    sched = schedule or Schedule.ramp_hold(c_hold, iterations)
    cfg = RunConfig(schedule=sched, update_order=update_order, device_mode=mode, seed=seed)
    results, ok = [], []
    for sd in trial_seeds(seed, trials):
        res = run(enc.model, "random", cfg.replace(seed=sd), target_energy=w * L_opt)
        t = decode(enc, res.solution_state)
        ok.append(isinstance(t, Tour) and t.length <= L_opt + 1e-9)
        results.append(res)
    cps = sorted({min(int(c), iterations) for c in checkpoints} | {iterations})
    return {
        "n": n, "seed": seed, "trials": trials, "iterations": iterations,
        "w": w, "c_hold": c_hold, "variant": variant, "spins": enc.model.n,
        "cities": inst.cities.tolist(), "optimal_length": L_opt, "optimal_order": list(opt_orders[0]),
        "success_probability": float(np.mean(ok)),
        "curve": success_curve(results, cps),
        "trial_seeds": [r.seed for r in results],
        "run_config": cfg.to_dict(),
    }


def _success(spec: ExperimentSpec) -> ExperimentResult:
    sizes = tuple(spec.sizes) or (spec.n or 9,)
    iters = spec.iterations or 10_000
    sched = Schedule.parse(spec.schedule, iters) if spec.schedule else None
    rows, docs = [], []
    for n in sizes:
        doc = success_experiment(n, spec.trials, iters, spec.seed, w=spec.w,
                                 variant=spec.overrides.get("variant", FULL), mode=spec.mode, schedule=sched)
        docs.append(doc)
        rows += [(n, t, p) for t, p in doc["curve"]]
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = spec.out_dir / "success_curve.csv"
    with csv_path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "iteration", "success_probability"])
        wr.writerows(rows)
    path = _write(spec, "success_curve", {"sizes": docs})
    summary = {"success": {d["n"]: d["success_probability"] for d in docs}}
    return ExperimentResult(summary, [path, csv_path])


def _pipeline(spec: ExperimentSpec) -> ExperimentResult:
    inst = load(spec)
    kw = dict(spec.overrides)
    if spec.budget is not None:
        kw["spin_budget"] = spec.budget
    if spec.theta is not None:
        kw["theta"] = spec.theta
    if spec.mode:
        kw["device_mode"] = spec.mode
    cfg = PipelineConfig(seed=spec.seed, **kw)
    tour, rep = pipeline_run(inst, cfg)
    summary = {"instance": inst.name, "n": inst.n, "final_length": tour.length,
               "stitched_length": rep.stitched_length, "total_iterations": rep.total_iterations,
               "max_spins": rep.max_spins}
    path = _write(spec, "pipeline", {"config": cfg.to_dict(), "report": rep.to_dict()})
    return ExperimentResult(summary, [path])


def _device_trace(spec: ExperimentSpec) -> ExperimentResult:
    params = DeviceParams(**spec.overrides.get("device", {}))
    rng = np.random.default_rng(spec.seed)
    paths, rows = [], []
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    for cur in spec.currents:
        tr = sampled_trace(params, cur, spec.samples, params.tau0, rng)
        p = spec.out_dir / f"trace_{cur:g}uA.csv"
        tr.to_csv(p)
        paths.append(p)
        rows.append({"current_uA": cur, "occupancy": tr.occupancy(), "p_ap": p_ap(params, cur)})
    summary = {"traces": rows}
    paths.insert(0, _write(spec, "device_trace", summary))
    return ExperimentResult(summary, paths)


def _calibrate(spec: ExperimentSpec) -> ExperimentResult:
    if not spec.inputs:
        raise ContractViolation("calibrate needs trace CSV files via --input")
    traces = [TelegraphTrace.from_csv(p) for p in spec.inputs]
    fit = calibrate(traces)
    summary = {"a": fit.a, "b": fit.b, "traces": [str(p) for p in spec.inputs]}
    return ExperimentResult(summary, [_write(spec, "calibrate", summary)])


def _spin_report(spec: ExperimentSpec) -> ExperimentResult:
    names = spec.inputs or tsplib.BUNDLED
    sizes = [(Path(str(x)).stem, tsplib.dimension_of(x)) for x in names]
    budget = spec.budget or 81
    rows = spin_count_report(sizes, budget)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = spec.out_dir / "spin_report.csv"
    with csv_path.open("w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=["name", "n", "conventional", "ours"])
        wr.writeheader()
        wr.writerows(rows)
    return ExperimentResult({"rows": rows, "budget": budget}, [_write(spec, "spin_report", {"rows": rows}), csv_path])


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    handlers = {
        "solve_tsp": lambda s: _direct(s, False),
        "solve_ctsp": lambda s: _direct(s, True),
        "pipeline": _pipeline,
        "success_curve": _success,
        "device_trace": _device_trace,
        "calibrate": _calibrate,
        "spin_report": _spin_report,
    }
    return handlers[spec.kind](spec)
