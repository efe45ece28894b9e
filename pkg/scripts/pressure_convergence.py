"""Pressure of -log f' at the Ulam stationary measure as the grid is refined.

    python3 scripts/pressure_convergence.py --family smooth_perturbed --degree 2 --c 0.1
"""
import argparse
import csv
import sys

from ergolab.circle_map import make_map
from ergolab.equilibrium import pressure_estimate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="smooth_perturbed")
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--c", type=float, default=0.1)
    ap.add_argument("--k", type=int, nargs="+", default=[256, 512, 1024, 2048])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    fmap = make_map(args.family, args.degree, args.c)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["k", "q", "entropy_est", "markov_entropy", "lyapunov", "pressure"])
    for k in args.k:
        est = pressure_estimate(fmap, k, seed=args.seed)
        w.writerow([k, est.q_used, f"{est.entropy_est:.8f}", f"{est.markov_entropy:.8f}",
                    f"{est.lyapunov:.8f}", f"{est.pressure:.3e}"])


if __name__ == "__main__":
    main()
