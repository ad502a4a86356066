"""Wall time of triangulation, filtration and assembly versus atom count.

Usage: python3 scripts/benchmark.py [--sizes 500 1000 2000 5000]
"""

import argparse
import time

from lagint import assemble, build, compute_filtration
from lagint.synthetic import compact_molecule


def timed(fn, *args):
    t = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000, 5000])
    ap.add_argument("--weights", type=float, nargs="+", default=[0.0, 1.96, 4.0])
    args = ap.parse_args()

    print("atoms,tets,build_s,filtration_s,assemble_s_per_weight")
    for n in args.sizes:
        fr = compact_molecule(n, seed=0)
        tri, tb = timed(build, fr.centers, fr.weights)
        f, tf = timed(compute_filtration, tri)
        ta = sum(timed(assemble, f, w, fr.labels)[1] for w in args.weights) / len(args.weights)
        print(f"{n},{len(tri.tets)},{tb:.3f},{tf:.3f},{ta:.3f}")


if __name__ == "__main__":
    main()
