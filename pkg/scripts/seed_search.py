"""Scan grid_source seeds for problems where the informed sweep departs from greedy.

    python scripts/seed_search.py --seeds 0:40 --m0-start 3 --m-max 10
"""
import argparse

import numpy as np

from aoed import greedy, informed, model, problems


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", default="0:20")
    ap.add_argument("--n", type=int, default=49)
    ap.add_argument("--m", type=int, default=24)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--radius", type=float, default=problems.ProblemSpec.sensor_radius)
    ap.add_argument("--width", type=float, default=problems.ProblemSpec.kernel_width)
    ap.add_argument("--m0-start", type=int, default=3)
    ap.add_argument("--m-max", type=int, default=10)
    args = ap.parse_args()
    lo, hi = (int(x) for x in args.seeds.split(":"))

    print("seed  differing  mean_impr  best_impr  pruned")
    for seed in range(lo, hi + 1):
        spec = problems.ProblemSpec(family="grid_source", n=args.n, m=args.m, d=args.d, seed=seed,
                                     sensor_radius=args.radius, kernel_width=args.width)
        mod = problems.generate(spec)
        ker = model.precompute(mod)
        g = greedy.greedy_sweep(mod, ker, args.m_max)
        inf = informed.informed_sweep(mod, ker, args.m0_start, args.m_max)
        rep = informed.compare_sweeps(g, inf)
        differing = sum(
            not np.array_equal(d.w, g.at(c)[0].w) for d, c in zip(inf.designs, inf.counts))
        print(f"{seed:4d}  {differing:9d}  {100 * rep.mean_improvement:8.3f}%  "
              f"{100 * rep.best_improvement:8.3f}%  {inf.pruned_counts}")


if __name__ == "__main__":
    main()
