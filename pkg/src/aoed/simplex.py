"""The relaxed constraint set {w : 0 <= w <= 1, sum(w) <= budget}."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidBudget

SUM_TOL = 1e-12
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class CappedSimplex:
    m: int
    budget: int

    def __post_init__(self):
        if self.m < 1:
            raise DimensionMismatch(f"dimension must be positive, got {self.m}")
        if not 1 <= self.budget <= self.m:
            raise InvalidBudget(f"budget {self.budget} outside [1, {self.m}]")

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.m,):
            raise DimensionMismatch(f"vector has shape {v.shape}, expected ({self.m},)")
        return v

    def contains(self, w, tol=1e-9):
        w = self._check(w)
        return bool(np.all(w >= -tol) and np.all(w <= 1 + tol) and w.sum() <= self.budget + tol)

    def project(self, v):
        """Euclidean projection, ``clip(v - tau, 0, 1)`` with ``tau >= 0`` found by bisection."""
        v = self._check(v)
        c = np.clip(v, 0.0, 1.0)
        if c.sum() <= self.budget:
            return c
        # sum(clip(v - tau)) is nonincreasing in tau; it is > budget at 0 and 0 at max(v)
        lo, hi = 0.0, float(np.max(v))
        tau = hi
        for _ in range(MAX_BISECTIONS):
            tau = 0.5 * (lo + hi)
            s = np.clip(v - tau, 0.0, 1.0).sum()
            if abs(s - self.budget) <= SUM_TOL:
                break
            if s > self.budget:
                lo = tau
            else:
                hi = tau
            if hi - lo <= np.spacing(hi):
                tau = hi
                break
        return np.clip(v - self._refine(v, tau), 0.0, 1.0)

    def _refine(self, v, tau):
        # closed-form threshold on the support found by bisection; keeps the
        # budget residual at rounding level so tiny projected steps stay descent
        x = v - tau
        free = (x > 0) & (x < 1)
        if not free.any():
            return tau
        ones = np.count_nonzero(x >= 1)
        exact = (v[free].sum() - (self.budget - ones)) / np.count_nonzero(free)
        y = v - exact
        if exact >= 0 and np.array_equal(free, (y > 0) & (y < 1)) and ones == np.count_nonzero(y >= 1):
            return exact
        return tau

    def linear_minimizer(self, g):
        """Vertex minimizing ``<g, w>``; ties go to the lowest index."""
        g = self._check(g)
        order = np.argsort(g, kind="stable")
        count = min(self.budget, int(np.count_nonzero(g < 0)))
        w = np.zeros(self.m)
        w[order[:count]] = 1.0
        return w


def contains(s, w, tol=1e-9):
    return s.contains(w, tol)


def project(s, v):
    return s.project(v)


def linear_minimizer(s, g):
    return s.linear_minimizer(g)
