"""Monte Carlo cell frequencies vs the exact distribution as the pair count grows.

Prints the largest per-cell z-score for each N; it should stay O(1).
"""

import argparse
import math

import numpy as np

from eprsim import RunConfig, digital_distribution, run_setting


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.4)
    ap.add_argument("--beta", type=float, default=1.3)
    ap.add_argument("--delta", type=float, default=math.pi / 2)
    ap.add_argument("--threshold", type=float, default=0.1)
    ap.add_argument("--decoherence", type=float, default=0.2)
    ap.add_argument("--max-exp", type=int, default=7)
    args = ap.parse_args()

    p = digital_distribution(args.alpha, args.beta, args.delta, args.threshold, args.decoherence).probs
    for e in range(2, args.max_exp + 1):
        n = 10**e
        cfg = RunConfig(pairs_per_setting=n, beta=args.beta, delta=args.delta,
                        threshold=args.threshold, decoherence=args.decoherence)
        freq = run_setting(cfg, args.alpha, 0).counts / n
        sigma = np.sqrt(p * (1 - p) / n)
        z = np.abs(freq - p)[sigma > 0] / sigma[sigma > 0]
        print(f"N=1e{e}  max|dev|={np.abs(freq - p).max():.2e}  max z={z.max():.2f}")


if __name__ == "__main__":
    main()
