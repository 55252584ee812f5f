"""Grid over (w * max d, hold c) for the small-instance success probability.

Tuning is done on instance seeds other than the acceptance seed (7).
"""

import argparse
import itertools

import numpy as np

from smtj_ising.bench import success_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--instances", default="11,12,13,14")
    ap.add_argument("--w-scales", default="1,2,3,3.8")
    ap.add_argument("--holds", default="0.5,0.7,0.85,1.0,1.5")
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--iters", type=int, default=10_000)
    args = ap.parse_args()

    seeds = [int(s) for s in args.instances.split(",")]
    print("w_scale c_hold mean_success per_instance")
    for ws, ch in itertools.product([float(x) for x in args.w_scales.split(",")],
                                    [float(x) for x in args.holds.split(",")]):
        ps = [success_experiment(args.n, args.trials, args.iters, s, w_scale=ws, c_hold=ch)["success_probability"]
              for s in seeds]
        print(f"{ws:g} {ch:g} {np.mean(ps):.3f} {' '.join(f'{p:.2f}' for p in ps)}")


if __name__ == "__main__":
    main()
