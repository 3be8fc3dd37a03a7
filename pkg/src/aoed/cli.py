"""Command-line front end.

    aoed generate --family diagonal --variances 4,1 --out M/
    aoed solve --model M/ --method relaxed --m0 1 --out R/
    aoed compare --model M/ --m0-start 3 --m-max 10 --out C/
    aoed certify --model M/ --design w.csv --m0 1

Exit status: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import greedy, informed, model, problems, relaxed
from .errors import AoedError, IoError
from .problems import atomic_write

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(x):
    return format(float(x), ".17g")


def _rows_csv(rows):
    return "".join(",".join(r) + "\n" for r in rows)


def _parse_range(text):
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"m0-range: expected a:b, got {text!r}") from None
    if a > b:
        raise UsageError(f"m0-range: start {a} exceeds end {b}")
    return a, b


def _parse_floats(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"variances: cannot parse {text!r}") from None


def _solver_options(args):
    return relaxed.SolverOptions(max_iters=args.max_iters, tol_pg=args.tol_pg)


def _load(path):
    return problems.load_model(path)


def _out_dir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _write(path, text):
    try:
        atomic_write(path, text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def cmd_generate(args):
    if args.family == "diagonal":
        if args.variances is None:
            raise UsageError("variances: required for the diagonal family")
        spec = problems.ProblemSpec(family="diagonal", variances=_parse_floats(args.variances),
                                    noise_var=args.noise_var)
    else:
        for name in ("m", "n"):
            if getattr(args, name) is None:
                raise UsageError(f"{name}: required for the {args.family} family")
        kwargs = dict(family=args.family, m=args.m, d=args.d, n=args.n, seed=args.seed,
                      noise_percent=args.noise_percent, noise_var=args.noise_var)
        for name in ("length_scale", "amplitude", "extent", "sensor_radius", "kernel_width"):
            if getattr(args, name) is not None:
                kwargs[name] = getattr(args, name)
        spec = problems.ProblemSpec(**kwargs)
    try:
        spec.validate()
    except AoedError as exc:
        raise UsageError(str(exc)) from None
    mod = problems.generate(spec)
    problems.save_model(mod, args.out, provenance={"generator": "aoed", "spec": spec.to_dict()})
    print(f"m={mod.m} d={mod.d} n={mod.n} noise_var={_fmt(mod.noise_var)}")
    return EXIT_OK


def _budgets(args, m):
    if args.m0 is not None:
        lo = hi = args.m0
        field = "m0"
    else:
        lo, hi = _parse_range(args.m0_range)
        field = "m0-range"
    if not 1 <= lo <= hi <= m:
        raise UsageError(f"{field}: budgets must lie in [1, {m}]")
    return lo, hi


def cmd_solve(args):
    mod = _load(args.model)
    lo, hi = _budgets(args, mod.m)
    ker = model.precompute(mod)
    out = _out_dir(args.out)
    designs, objectives = [], []

    if args.method == "greedy":
        trace = greedy.greedy_sweep(mod, ker, hi)
        for m0 in range(lo, hi + 1):
            design, J = trace.at(m0)
            designs.append((m0, design.w))
            objectives.append((m0, J))
    elif args.method == "brute":
        for m0 in range(lo, hi + 1):
            design, J = greedy.brute_force_best(mod, ker, m0)
            designs.append((m0, design.w))
            objectives.append((m0, J))
    elif args.method == "relaxed":
        certificates = []
        for m0 in range(lo, hi + 1):
            sol = relaxed.solve_relaxed(mod, ker, m0, _solver_options(args))
            if not sol.converged:
                raise AoedError(
                    f"relaxed solve at m0={m0} did not converge "
                    f"(projected-gradient norm {sol.final_step_criterion:.3e})")
            cert = relaxed.certify_solution(mod, ker, sol)
            designs.append((m0, sol.w_star.w))
            objectives.append((m0, sol.objective_value))
            certificates.append({"m0": m0, **cert.to_dict()})
        _write(out / "certificate.json", json.dumps(certificates, indent=2) + "\n")
    else:
        opts = informed.InformedOptions(solver=_solver_options(args), prune_every=args.prune_every)
        trace = informed.informed_sweep(mod, ker, lo, hi, opts)
        for m0, design, J in zip(trace.counts, trace.designs, trace.objectives):
            designs.append((m0, design.w))
            objectives.append((m0, J))
        report = informed.compare_sweeps(greedy.greedy_sweep(mod, ker, hi), trace)
        _write(out / "comparison.csv", report.to_csv())
        _write(out / "comparison.json", report.to_json(include_timing=False))

    _write(out / "designs.csv", _rows_csv([[str(m0)] + [_fmt(x) for x in w] for m0, w in designs]))
    _write(out / "objectives.csv", _rows_csv([[str(m0), _fmt(J)] for m0, J in objectives]))
    for m0, J in objectives:
        print(f"m0={m0} J={_fmt(J)}")
    return EXIT_OK


def cmd_compare(args):
    mod = _load(args.model)
    m_max = mod.m if args.m_max is None else args.m_max
    if not 1 <= args.m0_start <= m_max <= mod.m:
        raise UsageError(f"m0-start/m-max: need 1 <= m0-start <= m-max <= {mod.m}")
    ker = model.precompute(mod)
    out = _out_dir(args.out)
    g = greedy.greedy_sweep(mod, ker, m_max)
    opts = informed.InformedOptions(solver=_solver_options(args), prune_every=args.prune_every)
    trace = informed.informed_sweep(mod, ker, args.m0_start, m_max, opts)
    report = informed.compare_sweeps(g, trace)
    _write(out / "comparison.csv", report.to_csv())
    _write(out / "comparison.json", report.to_json(include_timing=False))
    _write(out / "timing.json", json.dumps(report.timing(), indent=2) + "\n")
    print(report.summary_line())
    return EXIT_OK


def cmd_certify(args):
    mod = _load(args.model)
    if not 1 <= args.m0 <= mod.m:
        raise UsageError(f"m0: must lie in [1, {mod.m}]")
    try:
        w = np.loadtxt(args.design, delimiter=",", ndmin=1)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read design {args.design}: {exc}") from exc
    if w.ndim == 2:
        raise UsageError("design: expected a single vector")
    if w.size == mod.m + 1:
        w = w[1:]  # a designs.csv row, leading m0 column
    if w.size != mod.m:
        raise UsageError(f"design: expected {mod.m} weights, got {w.size}")
    cert = relaxed.certify(mod, model.precompute(mod), w, args.m0)
    print(json.dumps(cert.to_dict(), indent=2))
    return EXIT_OK


def _add_solver_flags(p):
    p.add_argument("--tol-pg", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--prune-every", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="aoed", description="A-optimal sensor placement")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a generated model directory")
    p.add_argument("--family", choices=problems.FAMILIES, required=True)
    p.add_argument("--variances")
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-percent", type=float, default=1.0)
    p.add_argument("--noise-var", type=float)
    p.add_argument("--length-scale", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--extent", type=float)
    p.add_argument("--sensor-radius", type=float)
    p.add_argument("--kernel-width", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="compute designs with one method")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("greedy", "relaxed", "informed", "brute"), required=True)
    budget = p.add_mutually_exclusive_group(required=True)
    budget.add_argument("--m0", type=int)
    budget.add_argument("--m0-range")
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="greedy vs informed sweep report")
    p.add_argument("--model", required=True)
    p.add_argument("--m0-start", type=int, default=informed.DEFAULT_M0_START)
    p.add_argument("--m-max", type=int)
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("certify", help="check first-order optimality of a design")
    p.add_argument("--model", required=True)
    p.add_argument("--design", required=True)
    p.add_argument("--m0", type=int, required=True)
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        if getattr(args, "prune_every", 1) < 1:
            raise UsageError("prune-every: must be a positive integer")
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AoedError, OSError) as exc:
        print(f"{parser.prog} {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:  # keep the exit-status contract for unforeseen failures
        print(f"{parser.prog} {args.command}: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
