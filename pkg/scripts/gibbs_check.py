"""Total-variation distance between sampled and exact Gibbs distributions.

Usage: python3 scripts/gibbs_check.py --models 5 --spins 8 --sweeps 1000000
"""

import argparse

import numpy as np

from smtj_ising.annealer import RunConfig, sample_states
from smtj_ising.ising import IsingModel, gibbs_distribution


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--models", type=int, default=5)
    ap.add_argument("--spins", type=int, default=8)
    ap.add_argument("--sweeps", type=int, default=1_000_000)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("model order mode TV")
    for k in range(args.models):
        m = IsingModel.random(args.spins, np.random.default_rng(args.seed + k))
        _, p = gibbs_distribution(m, args.c)
        for order in ("sequential_random", "sequential_fixed", "synchronous"):
            for mode in ("ideal", "faithful"):
                cfg = RunConfig(update_order=order, device_mode=mode, seed=args.seed + k)
                idx = sample_states(m, args.c, args.sweeps, cfg, burn_in=1000)
                q = np.bincount(idx, minlength=len(p)) / len(idx)
                print(f"{k} {order} {mode} {0.5 * np.abs(p - q).sum():.4f}")


if __name__ == "__main__":
    main()
