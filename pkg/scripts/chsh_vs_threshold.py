"""CHSH value against polarizer threshold: Monte Carlo mean/std next to the exact value.

    python scripts/chsh_vs_threshold.py --decoherence 0.1 --points 21
"""

import argparse

import numpy as np

from eprsim import RunConfig, chsh, oracle_chsh


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--decoherence", type=float, default=0.0)
    ap.add_argument("--max-threshold", type=float, default=0.3)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--pairs", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=20010501)
    args = ap.parse_args()

    print(f"{'threshold':>9} {'S_mean':>8} {'S_std':>7} {'S_exact':>8} {'z':>6}")
    for ds in np.linspace(0.0, args.max_threshold, args.points):
        cfg = RunConfig(seed=args.seed, threshold=float(ds), decoherence=args.decoherence)
        r = chsh(cfg, runs=args.runs, pairs_per_run=args.pairs)
        exact = oracle_chsh(threshold=float(ds), decoherence=args.decoherence)
        z = (r.s_mean - exact) / (r.s_stddev / np.sqrt(args.runs)) if r.s_stddev else 0.0
        print(f"{ds:9.3f} {r.s_mean:8.4f} {r.s_stddev:7.4f} {exact:8.4f} {z:6.2f}")


if __name__ == "__main__":
    main()
