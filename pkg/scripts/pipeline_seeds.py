"""Run the budgeted pipeline over several seeds and instances.

Example: python3 scripts/pipeline_seeds.py --instances st70 berlin52 --seeds 8
"""

import argparse
import time

import numpy as np

from smtj_ising.decomposition import PipelineConfig, pipeline_run
from smtj_ising.tsplib import load_instance

OPTIMA = {"berlin52": 7542, "st70": 675, "eil76": 538, "eil101": 629}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", nargs="+", default=["st70"])
    ap.add_argument("--seeds", type=int, default=4)
    ap.add_argument("--budget", type=int, default=81)
    ap.add_argument("--passes", type=int, default=None)
    ap.add_argument("--mode", choices=("ideal", "faithful"), default="ideal")
    args = ap.parse_args()

    for name in args.instances:
        inst = load_instance(name)
        lengths = []
        for seed in range(args.seeds):
            kw = {"window_passes": args.passes} if args.passes is not None else {}
            cfg = PipelineConfig(spin_budget=args.budget, seed=seed, device_mode=args.mode, **kw)
            t0 = time.perf_counter()
            tour, rep = pipeline_run(inst, cfg)
            lengths.append(tour.length)
            print(f"{name} seed={seed} stitched={rep.stitched_length:.0f} final={tour.length:.0f} "
                  f"sweeps={rep.total_iterations} max_spins={rep.max_spins} {time.perf_counter() - t0:.1f}s")
        opt = OPTIMA.get(name)
        gap = f" gap to optimum {100 * (np.median(lengths) / opt - 1):.1f}%" if opt else ""
        print(f"{name}: median {np.median(lengths):.0f}, best {min(lengths):.0f}{gap}")


if __name__ == "__main__":
    main()
