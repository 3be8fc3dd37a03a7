"""Greedy, informed and relaxed objective curves on the shipped grid problem.

    python scripts/compare_grid.py --out results/showcase

Writes curves.csv (m0, J for the three sequences, pruned/reintroduced counts)
and the comparison report, then prints the summary line.  Rendering is left
to whatever plotting tool is at hand.
"""
import argparse
import csv
from pathlib import Path

from aoed import greedy, informed, model, problems


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=problems.SHOWCASE["seed"])
    ap.add_argument("--m0-start", type=int, default=problems.SHOWCASE_M0_START)
    ap.add_argument("--m-max", type=int, default=problems.SHOWCASE_M_MAX)
    ap.add_argument("--prune-every", type=int, default=1)
    ap.add_argument("--out", default="results/showcase")
    args = ap.parse_args()

    spec = problems.ProblemSpec(**{**problems.SHOWCASE, "seed": args.seed})
    mod = problems.generate(spec)
    ker = model.precompute(mod)
    g = greedy.greedy_sweep(mod, ker, args.m_max)
    trace = informed.informed_sweep(mod, ker, args.m0_start, args.m_max,
                                    informed.InformedOptions(prune_every=args.prune_every))
    rep = informed.compare_sweeps(g, trace)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problems.save_model(mod, out / "model", provenance={"spec": spec.to_dict()})
    with open(out / "curves.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m0", "J_greedy", "J_informed", "J_relaxed", "pruned", "reintroduced"])
        for row, p, r in zip(rep.rows, trace.pruned_counts, trace.reintroduced_counts):
            w.writerow([row["m0"], *(format(row[c], ".17g") for c in ("J_greedy", "J_informed", "J_relaxed")), p, r])
    (out / "comparison.json").write_text(rep.to_json())
    print(rep.summary_line())


if __name__ == "__main__":
    main()
