"""Block entropies H(P^q)/q of a long orbit for each map family, showing the approach to lambda.

    python3 scripts/entropy_depth.py --n 1000000
"""
import argparse

from ergolab.circle_map import lebesgue_points, make_map
from ergolab.entropy import entropy_estimate, lyapunov_exponent
from ergolab.measures import empirical_measure

MAPS = [("linear", 2, 0.0), ("linear", 3, 0.0), ("smooth_perturbed", 2, 0.1),
        ("smooth_perturbed", 3, 0.5), ("nonhoelder", 2, 0.05), ("nonhoelder", 3, 1.0)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    x0 = lebesgue_points(1, args.seed)[0]
    for family, d, c in MAPS:
        fmap = make_map(family, d, c)
        mu = empirical_measure(fmap, x0, args.n)
        est = entropy_estimate(fmap, mu)
        lyap = lyapunov_exponent(fmap, mu)
        diag = " ".join(f"{h:.4f}" for h in est.diagnostics)
        print(f"{fmap.tag:<28} lambda {lyap:.5f}  q={est.q_used}  H/q: {diag}")


if __name__ == "__main__":
    main()
