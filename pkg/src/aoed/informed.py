"""Greedy sweep corrected by the relaxed global optimum.

At each sensor count the relaxed problem is solved, sensors the optimality
certificate marks as redundant are dropped from the current binary design, and
the design is refilled greedily.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import model as _model
from .errors import InvalidBudget, NotCertified, RangeMismatch
from .greedy import _run_greedy
from .relaxed import SolverOptions, certify_solution, classify_redundant, solve_relaxed
from .simplex import CappedSimplex

DEFAULT_M0_START = 6
LOWER_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class InformedOptions:
    solver: SolverOptions = field(default_factory=SolverOptions)
    prune_every: int = 1
    warm_start: bool = True
    incremental: bool = True


@dataclass
class InformedTrace:
    designs: list
    objectives: list
    relaxed_objectives: list  # nan where the relaxed problem was skipped
    pruned_counts: list
    reintroduced_counts: list
    relaxed_seconds: float
    total_seconds: float
    relaxed_designs: list = field(default_factory=list, repr=False)

    @property
    def counts(self):
        return [int(np.count_nonzero(d.w)) for d in self.designs]


def informed_sweep(model, kernels, m0_start=DEFAULT_M0_START, m_max=None, opts=None):
    m_max = model.m if m_max is None else m_max
    if not 1 <= m0_start <= m_max <= model.m:
        raise InvalidBudget(f"need 1 <= m0_start={m0_start} <= m_max={m_max} <= m={model.m}")
    opts = opts or InformedOptions()
    if opts.prune_every < 1:
        raise ValueError("prune_every must be a positive integer")
    t_start = time.perf_counter()
    relaxed_seconds = 0.0

    designs, objectives, _, _ = _run_greedy(
        model, kernels, np.zeros(model.m), m0_start, opts.incremental)
    w = designs[-1]
    J = objectives[-1]

    trace = InformedTrace([], [], [], [], [], 0.0, 0.0)
    w_prev_star = None
    for m0 in range(m0_start, m_max + 1):
        pruned = set()
        reintroduced = 0
        J_star = float("nan")
        w_star = None
        if (m0 - m0_start) % opts.prune_every == 0:
            solver = opts.solver
            if opts.warm_start and w_prev_star is not None:
                scaled = w_prev_star * m0 / w_prev_star.sum()
                solver = replace(solver, w0=CappedSimplex(model.m, m0).project(scaled))
            t0 = time.perf_counter()
            solution = solve_relaxed(model, kernels, m0, solver)
            cert = certify_solution(model, kernels, solution)
            relaxed_seconds += time.perf_counter() - t0
            if not solution.converged:
                raise NotCertified(
                    f"relaxed solve at m0={m0} stopped after {solution.iterations} iterations "
                    f"with projected-gradient norm {solution.final_step_criterion:.3e}")
            J_star = solution.objective_value
            w_star = solution.w_star.w
            w_prev_star = w_star
            if m0 > m0_start:
                pruned = {k for k in classify_redundant(cert) if w[k] == 1.0}
        if m0 > m0_start:
            w = w.copy()
            w[sorted(pruned)] = 0.0
            designs, objectives, selected, _ = _run_greedy(
                model, kernels, w, m0, opts.incremental)
            w = designs[-1]
            J = objectives[-1]
            reintroduced = len(pruned.intersection(selected))
        trace.designs.append(_model.Design(w, m0))
        trace.objectives.append(J)
        trace.relaxed_objectives.append(J_star)
        trace.relaxed_designs.append(w_star)
        trace.pruned_counts.append(len(pruned))
        trace.reintroduced_counts.append(reintroduced)

    trace.relaxed_seconds = relaxed_seconds
    trace.total_seconds = time.perf_counter() - t_start
    return trace


CSV_COLUMNS = ("m0", "J_greedy", "J_informed", "J_relaxed", "rel_improvement")


def _fmt(x):
    return format(float(x), ".17g")


@dataclass
class ComparisonReport:
    rows: list  # dicts keyed by CSV_COLUMNS
    mean_improvement: float
    best_improvement: float
    fraction_not_worse: float
    greedy_seconds: float
    informed_seconds: float
    relaxed_seconds: float

    def summary(self):
        return {
            "mean_improvement": self.mean_improvement,
            "best_improvement": self.best_improvement,
            "fraction_not_worse": self.fraction_not_worse,
        }

    def timing(self):
        return {
            "greedy_seconds": self.greedy_seconds,
            "informed_seconds": self.informed_seconds,
            "relaxed_seconds": self.relaxed_seconds,
        }

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([row["m0"]] + [_fmt(row[c]) for c in CSV_COLUMNS[1:]])
        return buf.getvalue()

    def to_json(self, include_timing=True):
        doc = {
            "columns": list(CSV_COLUMNS),
            "rows": [
                {c: (row[c] if c == "m0" or np.isfinite(row[c]) else None) for c in CSV_COLUMNS}
                for row in self.rows
            ],
            "summary": self.summary(),
        }
        if include_timing:
            doc["timing"] = self.timing()
        return json.dumps(doc, indent=2) + "\n"

    def summary_line(self):
        return (f"mean improvement {100 * self.mean_improvement:.2f}%, "
                f"best-case {100 * self.best_improvement:.2f}%, "
                f"informed <= greedy at {100 * self.fraction_not_worse:.0f}% of budgets; "
                f"relaxed {self.relaxed_seconds:.2f}s of {self.informed_seconds:.2f}s informed, "
                f"greedy {self.greedy_seconds:.2f}s")


def compare_sweeps(greedy_trace, informed_trace):
    greedy = dict(zip(greedy_trace.counts, greedy_trace.objectives))
    relaxed = dict(zip(informed_trace.counts, informed_trace.relaxed_objectives))
    informed = dict(zip(informed_trace.counts, informed_trace.objectives))
    common = sorted(set(greedy) & set(informed))
    if not common:
        raise RangeMismatch("greedy and informed traces share no sensor count")
    rows = []
    for m0 in common:
        Jg, Ji = float(greedy[m0]), float(informed[m0])
        rows.append({
            "m0": m0, "J_greedy": Jg, "J_informed": Ji, "J_relaxed": float(relaxed[m0]),
            "rel_improvement": (Jg - Ji) / Jg,
        })
    imp = np.array([r["rel_improvement"] for r in rows])
    return ComparisonReport(
        rows=rows,
        mean_improvement=float(imp.mean()),
        best_improvement=float(imp.max()),
        fraction_not_worse=float(np.mean([r["J_informed"] <= r["J_greedy"] for r in rows])),
        greedy_seconds=float(greedy_trace.wall_clock),
        informed_seconds=float(informed_trace.total_seconds),
        relaxed_seconds=float(informed_trace.relaxed_seconds),
    )
