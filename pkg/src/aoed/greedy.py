"""Nested greedy sensor selection and the exhaustive binary oracle."""
from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import model as _model
from .errors import DimensionMismatch, IndexActive, InvalidBudget, NotBinary, TooLarge

DENSE_MAX_N = 1000
BRUTE_FORCE_LIMIT = 10 ** 6


def thread_count():
    """Worker cap from ``AOED_THREADS``, defaulting to the CPU count."""
    raw = os.environ.get("AOED_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass
class SweepTrace:
    designs: list
    objectives: list
    evaluations: int
    wall_clock: float
    selected: list = field(default_factory=list)

    @property
    def counts(self):
        return [int(np.count_nonzero(d.w)) for d in self.designs]

    def at(self, m0):
        """Design and objective for sensor count ``m0``."""
        i = self.counts.index(m0)
        return self.designs[i], self.objectives[i]


class PosteriorState:
    """Cached posterior for a binary design, updated one sensor at a time.

    The ``dense`` path keeps ``C_post`` (n x n).  The ``data`` path keeps
    ``F C_post F^T`` and ``F C_post^2 F^T`` and tracks the objective by
    accumulating gains, so it never touches parameter space after setup.
    """

    def __init__(self, model, kernels, path="auto"):
        if path == "auto":
            path = "dense" if model.n <= DENSE_MAX_N else "data"
        if path not in ("dense", "data"):
            raise ValueError(f"unknown posterior path {path!r}")
        self.model = model
        self.kernels = kernels
        self.path = path
        self.w = np.zeros(model.m)
        if path == "dense":
            self.C = np.array(model.prior_cov)
        else:
            self.Kp = np.array(kernels.K)
            self.Lp = np.array(kernels.L)
        self.J = kernels.prior_trace

    @classmethod
    def from_design(cls, model, kernels, w, path="auto"):
        w = _binary(w, model.m)
        state = cls(model, kernels, path)
        for k in np.flatnonzero(w):
            state.add(int(k))
        return state

    def _rows(self, k):
        d = self.model.d
        return slice(k * d, (k + 1) * d)

    def _block_terms(self):
        """Per-sensor ``S_k = sigma^2 I + F_k C_post F_k^T`` and ``F_k C_post^2 F_k^T``."""
        m, d = self.model.m, self.model.d
        if self.path == "dense":
            G = (self.model.forward @ self.C).reshape(m, d, -1)
            Fb = self.model.forward.reshape(m, d, -1)
            P = np.einsum("kin,kjn->kij", G, Fb)
            Q = np.einsum("kin,kjn->kij", G, G)
        else:
            idx = np.arange(m * d).reshape(m, d)
            P = self.Kp[idx[:, :, None], idx[:, None, :]]
            Q = self.Lp[idx[:, :, None], idx[:, None, :]]
        S = P + self.model.noise_var * np.eye(d)
        return S, Q

    def gains(self):
        """Exact change in ``J`` from activating each sensor; ``+inf`` at active ones."""
        S, Q = self._block_terms()
        g = -np.trace(np.linalg.solve(S, Q), axis1=1, axis2=2)
        g[self.w == 1.0] = np.inf
        return g

    def gain(self, k):
        if self.w[k] == 1.0:
            raise IndexActive(f"sensor {k} is already active")
        S, Q = self._block_terms()
        return float(-np.trace(np.linalg.solve(S[k], Q[k])))

    def add(self, k):
        if self.w[k] == 1.0:
            raise IndexActive(f"sensor {k} is already active")
        rows = self._rows(k)
        s2 = self.model.noise_var
        d = self.model.d
        if self.path == "dense":
            Gk = self.model.forward[rows] @ self.C
            S = Gk @ self.model.forward[rows].T + s2 * np.eye(d)
            Q = Gk @ Gk.T
            self.J += float(-np.trace(np.linalg.solve(S, Q)))
            self.C = self.C - Gk.T @ np.linalg.solve(S, Gk)
            self.C = 0.5 * (self.C + self.C.T)
        else:
            Kc = self.Kp[:, rows]
            Lc = self.Lp[:, rows]
            S = Kc[rows] + s2 * np.eye(d)
            Lkk = Lc[rows]
            self.J += float(-np.trace(np.linalg.solve(S, Lkk)))
            X = np.linalg.solve(S, Kc.T)  # S^-1 Kp[k, :]
            Y = np.linalg.solve(S, Lc.T)
            Kp = self.Kp - Kc @ X
            Lp = self.Lp - Lc @ X - Kc @ Y + X.T @ Lkk @ X
            self.Kp = 0.5 * (Kp + Kp.T)
            self.Lp = 0.5 * (Lp + Lp.T)
        self.w[k] = 1.0


def incremental_gain(state, k):
    """``J(w + e_k) - J(w)`` from a rank-d Woodbury downdate."""
    return state.gain(k)


def _binary(w, m):
    w = np.asarray(w, dtype=float)
    if w.shape != (m,):
        raise DimensionMismatch(f"design has shape {w.shape}, expected ({m},)")
    if not np.all((w == 0.0) | (w == 1.0)):
        raise NotBinary("design must have entries exactly 0 or 1")
    return w


def _full_recompute_step(model, kernels, w, pool):
    candidates = np.flatnonzero(w == 0.0)

    def trial(k):
        x = w.copy()
        x[k] = 1.0
        return _model.objective(model, kernels, x)

    values = list(pool.map(trial, candidates)) if pool else [trial(k) for k in candidates]
    # index-ordered reduction: candidates are ascending, argmin keeps the first
    j = int(np.argmin(values))
    return int(candidates[j]), float(values[j]), len(candidates)


def _run_greedy(model, kernels, w_init, target, incremental=True, path="auto"):
    """Greedy steps from ``w_init`` up to ``target`` active sensors.

    Returns (designs, objectives, selected, evaluations), one entry per step.
    """
    w = _binary(w_init, model.m).copy()
    designs, objectives, selected = [], [], []
    evaluations = 0
    if incremental:
        state = PosteriorState.from_design(model, kernels, w, path)
        while np.count_nonzero(state.w) < target:
            gains = state.gains()
            evaluations += int(np.count_nonzero(state.w == 0.0))
            k = int(np.argmin(gains))
            state.add(k)
            selected.append(k)
            designs.append(state.w.copy())
            objectives.append(state.J)
    else:
        workers = thread_count()
        pool = ThreadPoolExecutor(workers) if workers > 1 else None
        try:
            while np.count_nonzero(w) < target:
                k, J, count = _full_recompute_step(model, kernels, w, pool)
                evaluations += count
                w = w.copy()
                w[k] = 1.0
                selected.append(k)
                designs.append(w)
                objectives.append(J)
        finally:
            if pool:
                pool.shutdown()
    return designs, objectives, selected, evaluations


def greedy_sweep(model, kernels, m_max, incremental=True, path="auto"):
    """Nested greedy designs with 1..m_max sensors, starting from the empty design."""
    if not 1 <= m_max <= model.m:
        raise InvalidBudget(f"m_max={m_max} outside [1, {model.m}]")
    t0 = time.perf_counter()
    designs, objectives, selected, evaluations = _run_greedy(
        model, kernels, np.zeros(model.m), m_max, incremental, path)
    return SweepTrace(
        designs=[_model.Design(w, i + 1) for i, w in enumerate(designs)],
        objectives=objectives, evaluations=evaluations,
        wall_clock=time.perf_counter() - t0, selected=selected,
    )


def greedy_fill(model, kernels, w_init, target_count, incremental=True, path="auto"):
    """Continue the greedy algorithm from ``w_init`` until ``target_count`` sensors are active."""
    w_init = _binary(w_init, model.m)
    if not 1 <= target_count <= model.m or np.count_nonzero(w_init) > target_count:
        raise InvalidBudget(
            f"target_count={target_count} incompatible with {np.count_nonzero(w_init)} "
            f"active sensors and m={model.m}")
    designs, _, _, _ = _run_greedy(model, kernels, w_init, target_count, incremental, path)
    w = designs[-1] if designs else w_init
    return _model.Design(w, target_count)


def binary_objective(model, kernels, active):
    """``J`` of the binary design with the given active sensors, using only their kernel blocks."""
    d = model.d
    rows = np.concatenate([np.arange(k * d, (k + 1) * d) for k in active]) if len(active) else []
    if len(rows) == 0:
        return kernels.prior_trace
    S = kernels.K[np.ix_(rows, rows)] + model.noise_var * np.eye(len(rows))
    Lm = kernels.L[np.ix_(rows, rows)]
    return float(kernels.prior_trace - np.trace(linalg.cho_solve(linalg.cho_factor(S), Lm)))


def brute_force_best(model, kernels, m0):
    """Best binary design with exactly ``m0`` sensors by full enumeration.

    Ties keep the first candidate in lexicographic order of the sorted index tuple.
    """
    if not 1 <= m0 <= model.m:
        raise InvalidBudget(f"m0={m0} outside [1, {model.m}]")
    total = math.comb(model.m, m0)
    if total > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"C({model.m}, {m0}) = {total} designs exceeds {BRUTE_FORCE_LIMIT}")
    best, best_J = None, math.inf
    for active in itertools.combinations(range(model.m), m0):
        J = binary_objective(model, kernels, active)
        if J < best_J:
            best, best_J = active, J
    w = np.zeros(model.m)
    w[list(best)] = 1.0
    return _model.Design(w, m0), best_J
