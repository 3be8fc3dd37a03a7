"""Global optimum of the relaxed design problem and its first-order certificate.

The relaxed problem minimizes the A-optimal objective over the capped simplex.
Optimality is checked by sorting the gradient: with ``m0`` the budget, a point
is optimal iff it puts weight one on every index whose gradient lies strictly
below the ``(m0+1)``-th smallest value, weight zero on every index strictly above
the ``m0``-th smallest value, and spends the whole budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import model as _model
from .errors import DimensionMismatch, InvalidBudget, NonFiniteObjective, NotCertified
from .simplex import CappedSimplex

DOMINANT = "dominant"
REDUNDANT = "redundant"
INTERMEDIATE = "intermediate"

ARMIJO = 1e-4
MAX_HALVINGS = 60
STEP_MIN, STEP_MAX = 1e-12, 1e12
WEIGHT_TOL = 1e-6


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 2000
    tol_pg: float = 1e-8
    w0: np.ndarray | None = None


@dataclass
class RelaxedSolution:
    w_star: _model.Design
    objective_value: float
    iterations: int
    converged: bool
    final_step_criterion: float
    history: list = field(default_factory=list, repr=False)


@dataclass
class Certificate:
    sorted_gradient: np.ndarray
    permutation: np.ndarray
    threshold_low: float
    threshold_high: float  # +inf when the budget covers every sensor
    classification: list
    is_optimal: bool
    violations: list
    budget: int
    tol_grad: float
    converged: bool = True

    def indices(self, label):
        return [k for k, c in enumerate(self.classification) if c == label]

    def to_dict(self):
        return {
            "budget": self.budget,
            "threshold_low": self.threshold_low,
            "threshold_high": None if math.isinf(self.threshold_high) else self.threshold_high,
            "tol_grad": self.tol_grad,
            "classification": list(self.classification),
            "is_optimal": self.is_optimal,
            "violations": [[k, cond] for k, cond in self.violations],
            "sorted_gradient": [float(x) for x in self.sorted_gradient],
            "permutation": [int(p) for p in self.permutation],
        }


def projected_gradient_norm(feasible, w, g):
    return float(np.linalg.norm(w - feasible.project(w - g)))


def _face_shift(w, p, g, m0):
    # On the face sum(w) = m0 a constant added to the gradient leaves every
    # directional derivative unchanged; removing it keeps the rounding error of
    # sum(w) from swamping slopes near convergence.
    tol = 1e-12 * m0
    if abs(w.sum() - m0) > tol or abs(p.sum() - m0) > tol:
        return 0.0
    free = ((p > 0) & (p < 1)) | ((w > 0) & (w < 1))
    return float(g[free].mean()) if free.any() else 0.0


def solve_relaxed(model, kernels, m0, opts=None):
    """Projected gradient with Barzilai-Borwein steps and Armijo backtracking."""
    if not 1 <= m0 <= model.m:
        raise InvalidBudget(f"budget m0={m0} outside [1, {model.m}]")
    opts = opts or SolverOptions()
    feasible = CappedSimplex(model.m, m0)
    w = np.full(model.m, m0 / model.m) if opts.w0 is None else feasible.project(opts.w0)

    def evaluate(x):
        J, g = _model.objective_and_gradient(model, kernels, x)
        if not (np.isfinite(J) and np.all(np.isfinite(g))):
            raise NonFiniteObjective(f"objective or gradient not finite (J={J})")
        return J, g

    J, g = evaluate(w)
    history = [J]
    alpha = 1.0 / max(float(np.max(np.abs(g))), 1e-300)
    pg = projected_gradient_norm(feasible, w, g)
    converged = pg <= opts.tol_pg
    it = 0
    while not converged and it < opts.max_iters:
        it += 1
        p = feasible.project(w - alpha * g)
        step = p - w
        shift = _face_shift(w, p, g, m0)
        slope = float((g - shift) @ step)
        if slope >= 0:
            break
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            w_new = np.clip(w + lam * step, 0.0, 1.0)
            J_new, g_new = evaluate(w_new)
            if J_new <= J + ARMIJO * lam * slope:
                break
            # by convexity J_new <= J + lam * g_new.step, so this also certifies
            # sufficient decrease when J differences drown in rounding
            if (g_new - shift) @ step <= ARMIJO * slope:
                break
            lam *= 0.5
        else:
            break
        s = w_new - w
        y = g_new - g
        sy = float(s @ y)
        alpha = float(np.clip(s @ s / sy, STEP_MIN, STEP_MAX)) if sy > 0 else STEP_MAX
        w, J, g = w_new, J_new, g_new
        history.append(J)
        pg = projected_gradient_norm(feasible, w, g)
        converged = pg <= opts.tol_pg

    return RelaxedSolution(
        w_star=_model.Design(w, m0), objective_value=J, iterations=it,
        converged=converged, final_step_criterion=pg, history=history,
    )


def certify(model, kernels, w, m0, tol_grad=None, converged=True):
    """Check the sorted-gradient optimality conditions at a feasible ``w``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (model.m,):
        raise DimensionMismatch(f"design has shape {w.shape}, expected ({model.m},)")
    if not 1 <= m0 <= model.m:
        raise InvalidBudget(f"budget m0={m0} outside [1, {model.m}]")
    g = _model.gradient(model, kernels, w)
    if tol_grad is None:
        tol_grad = 1e-6 * float(np.max(np.abs(g)))
    perm = np.argsort(g, kind="stable")
    sg = g[perm]
    low = float(sg[m0 - 1])
    high = float(sg[m0]) if m0 < model.m else math.inf

    labels = []
    violations = []
    for k in range(model.m):
        if g[k] < high - tol_grad:
            labels.append(DOMINANT)
            if abs(w[k] - 1.0) > WEIGHT_TOL:
                violations.append((k, "a"))
        elif g[k] > low + tol_grad:
            labels.append(REDUNDANT)
            if abs(w[k]) > WEIGHT_TOL:
                violations.append((k, "b"))
        else:
            labels.append(INTERMEDIATE)
    if abs(w.sum() - m0) > WEIGHT_TOL:
        violations.append((-1, "c"))

    return Certificate(
        sorted_gradient=sg, permutation=perm, threshold_low=low, threshold_high=high,
        classification=labels, is_optimal=not violations, violations=violations,
        budget=m0, tol_grad=float(tol_grad), converged=converged,
    )


def certify_solution(model, kernels, solution, tol_grad=None):
    return certify(model, kernels, solution.w_star.w, solution.w_star.budget,
                   tol_grad=tol_grad, converged=solution.converged)


def classify_redundant(certificate):
    """Indices the certificate forces to zero."""
    if not certificate.converged:
        raise NotCertified("certificate comes from a relaxed solve that did not converge")
    return {k for k, c in enumerate(certificate.classification) if c == REDUNDANT}
