"""Bayesian linear-Gaussian inverse problem and the A-optimal objective.

The forward matrix ``F`` has ``m * d`` rows grouped in ``m`` contiguous
blocks of ``d`` rows, one block per candidate sensor.  A design ``w`` in
``[0, 1]^m`` weights the blocks, giving posterior precision

    C_prior^{-1} + (1 / sigma^2) * sum_k w_k F_k^T F_k

which is affine in ``w``, so ``J(w) = tr(C_post(w))`` is convex.  All
objective, gradient and Hessian evaluations run in the ``(m * d)``-dimensional
data space through the Woodbury identity; ``objective_dense_oracle`` is an
independent parameter-space path kept for verification.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, NonPositiveNoise, NotSPD

SYMMETRY_RTOL = 1e-12
FEASIBILITY_TOL = 1e-9


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _cholesky_with_jitter(cov):
    """Lower Cholesky factor of ``cov``; retries once with a tiny diagonal jitter."""
    try:
        return cov, np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    n = cov.shape[0]
    jitter = 1e-12 * np.trace(cov) / n
    cov = cov + jitter * np.eye(n)
    try:
        return cov, np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotSPD("prior covariance is not symmetric positive definite") from exc


@dataclass(frozen=True)
class Model:
    forward: np.ndarray
    m: int
    d: int
    n: int
    prior_cov: np.ndarray
    prior_mean: np.ndarray
    noise_var: float
    prior_chol: np.ndarray = field(repr=False, compare=False)

    def block(self, k):
        """Rows of the forward matrix observed by sensor ``k``."""
        return self.forward[k * self.d:(k + 1) * self.d]


@dataclass(frozen=True)
class PrecomputedKernels:
    K: np.ndarray  # F C F^T
    L: np.ndarray  # F C^2 F^T
    prior_trace: float


@dataclass(frozen=True)
class Design:
    w: np.ndarray
    budget: int

    def __post_init__(self):
        w = _readonly(self.w)
        if w.ndim != 1:
            raise DimensionMismatch("design weights must be a vector")
        if not 1 <= self.budget <= w.size:
            raise ValueError(f"budget {self.budget} outside [1, {w.size}]")
        if np.any(w < 0) or np.any(w > 1) or w.sum() > self.budget + FEASIBILITY_TOL:
            raise ValueError("design is not feasible")
        object.__setattr__(self, "w", w)

    @property
    def is_binary(self):
        return bool(np.all((self.w == 0.0) | (self.w == 1.0)))

    @property
    def support(self):
        return tuple(int(k) for k in np.flatnonzero(self.w))


def build_model(forward, m, d, prior_cov, prior_mean, noise_var):
    forward = np.asarray(forward, dtype=float)
    prior_cov = np.asarray(prior_cov, dtype=float)
    prior_mean = np.asarray(prior_mean, dtype=float)
    if m < 1 or d < 1:
        raise DimensionMismatch(f"m and d must be positive, got m={m}, d={d}")
    if forward.ndim != 2 or forward.shape[0] != m * d:
        raise DimensionMismatch(
            f"forward has {forward.shape[0] if forward.ndim else 0} rows, expected m*d = {m * d}")
    n = forward.shape[1]
    if n < 1:
        raise DimensionMismatch("parameter dimension must be positive")
    if prior_cov.shape != (n, n):
        raise DimensionMismatch(f"prior_cov has shape {prior_cov.shape}, expected ({n}, {n})")
    if prior_mean.shape != (n,):
        raise DimensionMismatch(f"prior_mean has shape {prior_mean.shape}, expected ({n},)")
    if not np.all(np.isfinite(forward)) or not np.all(np.isfinite(prior_cov)):
        raise DimensionMismatch("non-finite entries in model matrices")
    if not noise_var > 0:
        raise NonPositiveNoise(f"noise_var must be positive, got {noise_var}")
    scale = np.max(np.abs(prior_cov))
    if np.max(np.abs(prior_cov - prior_cov.T)) > SYMMETRY_RTOL * scale:
        raise NotSPD("prior covariance is not symmetric")
    prior_cov, chol = _cholesky_with_jitter(prior_cov)
    return Model(
        forward=_readonly(forward), m=int(m), d=int(d), n=int(n),
        prior_cov=_readonly(prior_cov), prior_mean=_readonly(prior_mean),
        noise_var=float(noise_var), prior_chol=_readonly(chol),
    )


def precompute(model):
    FC = model.forward @ model.prior_cov
    K = FC @ model.forward.T
    L = FC @ FC.T
    # exact symmetry keeps downstream Cholesky factorizations well defined
    K = 0.5 * (K + K.T)
    L = 0.5 * (L + L.T)
    return PrecomputedKernels(K=_readonly(K), L=_readonly(L),
                              prior_trace=float(np.trace(model.prior_cov)))


def _weights(model, w):
    w = np.asarray(w, dtype=float)
    if w.shape != (model.m,):
        raise DimensionMismatch(f"design has shape {w.shape}, expected ({model.m},)")
    return w


def _blocksum(a, m, d):
    return a.reshape(m, d).sum(axis=1)


class _Factorization:
    """Data-space quantities shared by objective, gradient and Hessian at one ``w``."""

    def __init__(self, model, kernels, w):
        self.model = model
        self.kernels = kernels
        self.r = np.repeat(np.sqrt(np.clip(w, 0.0, None)), model.d)
        md = model.m * model.d
        S = model.noise_var * np.eye(md) + self.r[:, None] * kernels.K * self.r[None, :]
        self.cho = linalg.cho_factor(S, lower=True, check_finite=False)
        self._T = None

    def objective(self):
        rLr = self.r[:, None] * self.kernels.L * self.r[None, :]
        return self.kernels.prior_trace - np.trace(linalg.cho_solve(self.cho, rLr))

    @property
    def T(self):
        # T = I - K A with A = W^1/2 S^-1 W^1/2, so that F C_post = T F C
        if self._T is None:
            AK = self.r[:, None] * linalg.cho_solve(self.cho, self.r[:, None] * self.kernels.K)
            self._T = np.eye(AK.shape[0]) - AK.T
        return self._T

    def gradient(self):
        T = self.T
        TL = T @ self.kernels.L
        diag = np.einsum("ij,ij->i", TL, T)
        return -_blocksum(diag, self.model.m, self.model.d) / self.model.noise_var

    def hessian(self):
        m, d = self.model.m, self.model.d
        T = self.T
        P = T @ self.kernels.K  # F C_post F^T
        Q = T @ self.kernels.L @ T.T  # F C_post^2 F^T
        P = 0.5 * (P + P.T)
        Q = 0.5 * (Q + Q.T)
        H = (P * Q).reshape(m, d, m, d).sum(axis=(1, 3))
        return 2.0 * H / self.model.noise_var ** 2


def objective(model, kernels, w):
    """A-optimal objective ``tr(C_post(w))``."""
    return float(_Factorization(model, kernels, _weights(model, w)).objective())


def gradient(model, kernels, w):
    """Gradient with entries ``-||F_k C_post||_F^2 / sigma^2``."""
    return _Factorization(model, kernels, _weights(model, w)).gradient()


def objective_and_gradient(model, kernels, w):
    f = _Factorization(model, kernels, _weights(model, w))
    return float(f.objective()), f.gradient()


def hessian(model, kernels, w):
    """Dense ``m x m`` Hessian, ``H_kl = 2/sigma^4 tr(C_post B_k C_post B_l C_post)``."""
    return _Factorization(model, kernels, _weights(model, w)).hessian()


def hessian_apply(model, kernels, w, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (model.m,):
        raise DimensionMismatch(f"direction has shape {v.shape}, expected ({model.m},)")
    return hessian(model, kernels, w) @ v


def posterior_mean(model, w, data, kernels=None):
    """Posterior mean for (possibly weighted) observations ``data`` of length ``m*d``.

    Each residual block is weighted by ``w_k``; blocks with ``w_k = 0`` are ignored.
    """
    w = _weights(model, w)
    data = np.asarray(data, dtype=float)
    if data.shape != (model.m * model.d,):
        raise DimensionMismatch(f"data has shape {data.shape}, expected ({model.m * model.d},)")
    if kernels is None:
        kernels = precompute(model)
    fac = _Factorization(model, kernels, w)
    resid = data - model.forward @ model.prior_mean
    # blocks with w_k = 0 may carry anything, including nan
    resid = np.where(fac.r > 0, resid, 0.0)
    z = fac.r * linalg.cho_solve(fac.cho, fac.r * resid)
    return model.prior_mean + model.prior_cov @ (model.forward.T @ z)


def posterior_cov_dense(model, w):
    """Posterior covariance formed in parameter space from the prior Cholesky factor."""
    w = _weights(model, w)
    R = model.prior_chol
    FR = model.forward @ R
    wr = np.repeat(w, model.d)
    M = np.eye(model.n) + (FR.T * wr) @ FR / model.noise_var
    try:
        Lm = np.linalg.cholesky(0.5 * (M + M.T))
    except np.linalg.LinAlgError as exc:
        raise NotSPD("posterior precision is not positive definite") from exc
    X = linalg.solve_triangular(Lm, R.T, lower=True)
    return X.T @ X


def objective_dense_oracle(model, w):
    """``tr(C_post(w))`` computed without the data-space kernels.

    ``C_post = R (I + R^T B R / sigma^2)^{-1} R^T`` with ``C_prior = R R^T`` and
    ``B = sum_k w_k F_k^T F_k``.
    """
    return float(np.trace(posterior_cov_dense(model, w)))
