"""Relative error of Monte-Carlo estimates against the analytic cells as n grows.

Usage: python3 scripts/mc_convergence.py [--atoms 20] [--weight 0.5]
"""

import argparse

import numpy as np

from lagint import compute_report
from lagint.montecarlo import mc_all
from lagint.synthetic import random_cluster


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", type=int, default=20)
    ap.add_argument("--box", type=float, default=8.0)
    ap.add_argument("--weight", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    fr = random_cluster(args.atoms, box=args.box, seed=args.seed)
    rep = compute_report(fr.centers, fr.weights, args.weight)
    analytic = {"liv": rep.volume, "sas": rep.sphere, "plis": rep.planar}
    print("n,quantity,mean_rel,max_rel,inside_ci")
    for n in (10 ** 4, 10 ** 5, 10 ** 6):
        est = mc_all(fr.centers, fr.weights, args.weight, n=n, seed=args.seed)
        for q, vals in analytic.items():
            rel = [abs(e.value - a) / a for e, a in zip(est[q], vals) if a > 0]
            inside = sum(e.contains(a) for e, a in zip(est[q], vals))
            print(f"{n},{q},{np.mean(rel):.3e},{np.max(rel):.3e},{inside}/{len(vals)}")


if __name__ == "__main__":
    main()
