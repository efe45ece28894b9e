"""Cluster the terminal empirical measures of a Lebesgue sample and compare with the Ulam density.

    python3 scripts/srb_scan.py --family smooth_perturbed --degree 2 --c 0.1 --n 1000000
"""
import argparse
import time

from ergolab.circle_map import make_map
from ergolab.equilibrium import stationary_measure, ulam_matrix
from ergolab.measures import TestFamily, l1_distance, weak_star_distance
from ergolab.srb_like import srb_like_candidates


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="smooth_perturbed")
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--c", type=float, default=0.1)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--grid-k", type=int, default=1024)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    fmap = make_map(args.family, args.degree, args.c)
    t0 = time.perf_counter()
    rep = srb_like_candidates(fmap, args.samples, args.n, args.grid_k, seed=args.seed, threads=args.threads)
    pi = stationary_measure(ulam_matrix(fmap, args.grid_k, seed=args.seed))
    fam = TestFamily(fmap)
    print(f"{fmap.tag}: {len(rep.candidates)} candidate(s), {rep.non_convergent} non-convergent, "
          f"{time.perf_counter() - t0:.1f}s")
    for i, cand in enumerate(rep.candidates):
        print(f"  [{i}] basin {cand.basin_weight:.3f}  h {cand.pesin.entropy_est:.5f}  "
              f"lambda {cand.pesin.lyapunov:.5f}  residual {cand.pesin.residual:+.2e}  "
              f"atomic {cand.atomic}  srb_like {cand.srb_like}")
        print(f"      L1 to Ulam {l1_distance(cand.measure, pi):.4f}  "
              f"weak* to Ulam {weak_star_distance(cand.measure, pi, fam):.2e}")


if __name__ == "__main__":
    main()
