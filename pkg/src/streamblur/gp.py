"""Gaussian-process regression over box trajectories.

One squared-exponential kernel over time is shared by all box channels
(center x, center y, width, height), so a single Cholesky factorization
serves the whole box.  Hyperparameters are fit by gradient ascent on the
log marginal likelihood in log-parameter space, which keeps them positive
without constraints.  A chi-square gate on the standardized residual decides
whether an observed box is consistent with the model's prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import gammaincinv

JITTER = 1e-9
DEFAULT_THETA = (1.0, 1.0, 0.1)
FIT_MAX_ITERS = 500
FIT_TOL = 1e-6


@dataclass(frozen=True)
class GPParams:
    """Kernel hyperparameters: signal variance, inverse squared bandwidth,
    observation noise variance."""

    rbf: float
    band: float
    noise: float

    def __post_init__(self):
        if self.rbf <= 0 or self.band <= 0 or self.noise < 0:
            raise ValueError(f"non-positive hyperparameters: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.rbf, self.band, self.noise])


def _neg_half_sqdist(z: np.ndarray) -> np.ndarray:
    dz = z[:, None] - z[None, :]
    return -0.5 * dz * dz


def kernel_matrix(z: np.ndarray, params: GPParams) -> np.ndarray:
    """Covariance of observations at times ``z`` (noise and jitter on the
    diagonal)."""
    z = np.asarray(z, dtype=np.float64)
    K = params.rbf * np.exp(params.band * _neg_half_sqdist(z))
    K[np.diag_indices_from(K)] += params.noise + JITTER * params.rbf
    return K


def cross_covariance(z_train, z_test, params: GPParams) -> np.ndarray:
    """K(train, test) without noise terms, shape (n_train, n_test)."""
    dz = np.asarray(z_train)[:, None] - np.asarray(z_test)[None, :]
    return params.rbf * np.exp(-0.5 * params.band * dz * dz)


def log_marginal_likelihood(z, X, params: GPParams) -> float:
    """Joint log evidence of all channels under the shared kernel."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.ndim == 2 and X.shape[0] == 1 and len(np.atleast_1d(z)) > 1:
        X = X.T
    n, d = X.shape
    K = kernel_matrix(z, params)
    cho = cho_factor(K, lower=True)
    alpha = cho_solve(cho, X)
    logdet = 2.0 * np.sum(np.log(np.diag(cho[0])))
    quad = float(np.sum(X * alpha))
    return float(-0.5 * d * n * np.log(2.0 * np.pi)
                 - 0.5 * d * logdet - 0.5 * quad)


def lml_gradient(z, X, params: GPParams) -> np.ndarray:
    """d(log evidence)/d(rbf, band, noise), all channels pooled."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.ndim == 2 and X.shape[0] == 1 and len(np.atleast_1d(z)) > 1:
        X = X.T
    n, d = X.shape
    z = np.asarray(z, dtype=np.float64)
    K = kernel_matrix(z, params)
    cho = cho_factor(K, lower=True)
    Kinv = cho_solve(cho, np.eye(n))
    alpha = cho_solve(cho, X)
    G = 0.5 * (alpha @ alpha.T - d * Kinv)
    bare = K.copy()
    bare[np.diag_indices_from(bare)] -= params.noise  # exp part plus jitter
    dK_rbf = bare / params.rbf
    dK_band = bare * _neg_half_sqdist(z)
    return np.array([
        float(np.sum(G * dK_rbf)),
        float(np.sum(G * dK_band)),
        float(np.trace(G)),
    ])


# log-parameter bounds; exp stays comfortably inside the finite range even
# when the evidence plateaus toward a zero or infinite hyperparameter
LOG_PARAM_LIMIT = 30.0


def fit(z, X, theta0=DEFAULT_THETA, max_iters: int = FIT_MAX_ITERS,
        tol: float = FIT_TOL) -> GPParams:
    """Maximize the evidence by damped gradient ascent in log-parameter space.

    Backtracking halves the step until the evidence improves; the search
    stops when the log-space gradient drops below ``tol`` in infinity norm.
    """
    u = np.log(np.asarray(theta0, dtype=np.float64))

    def objective(uv):
        p = GPParams(*np.exp(uv))
        try:
            return log_marginal_likelihood(z, X, p), p
        except (LinAlgError, np.linalg.LinAlgError):
            return -np.inf, p

    best, params = objective(u)
    step = 1.0
    for _ in range(max_iters):
        grad_theta = lml_gradient(z, X, params)
        grad_u = grad_theta * np.exp(u)  # chain rule through exp
        if np.max(np.abs(grad_u)) <= tol:
            break
        improved = False
        while step >= 1e-12:
            cand_u = np.clip(u + step * grad_u,
                             -LOG_PARAM_LIMIT, LOG_PARAM_LIMIT)
            if np.array_equal(cand_u, u):
                break
            cand, cand_p = objective(cand_u)
            if cand > best:
                u, best, params = cand_u, cand, cand_p
                improved = True
                step = min(step * 2.0, 1.0)
                break
            step *= 0.5
        if not improved:
            break
    return params


def predict(z_train, X, params: GPParams, z_test):
    """Posterior mean per channel and shared variance at ``z_test``.

    Returns ``(mean, var)`` with mean shaped (m, d) and var shaped (m,);
    variance is clamped at zero.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.ndim == 2 and X.shape[0] == 1 and len(np.atleast_1d(z_train)) > 1:
        X = X.T
    K = kernel_matrix(z_train, params)
    cho = cho_factor(K, lower=True)
    Ks = cross_covariance(z_train, z_test, params)
    mean = Ks.T @ cho_solve(cho, X)
    var = params.rbf + params.noise - np.einsum(
        "ij,ij->j", Ks, cho_solve(cho, Ks))
    return mean, np.maximum(var, 0.0)


def standardize(X):
    """Per-channel zero-mean unit-variance transform; constant channels keep
    scale 1 so the inverse is exact."""
    X = np.asarray(X, dtype=np.float64)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0.0, sd, 1.0)
    return (X - mu) / sd, mu, sd


# ---------------------------------------------------------------------------
# Residual gate
# ---------------------------------------------------------------------------

def chi2_quantile(d: int, alpha: float = 0.05) -> float:
    """Upper 1-alpha quantile of chi-square with d degrees of freedom."""
    if d < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0,1)")
    return float(2.0 * gammaincinv(d / 2.0, 1.0 - alpha))


def wilks_statistic(obs, mean, var) -> float:
    """Sum of squared residuals scaled by predictive variance.

    A channel with zero variance and a nonzero residual yields infinity
    (certain prediction contradicted); zero residual contributes nothing.
    """
    obs = np.asarray(obs, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    var = np.broadcast_to(np.asarray(var, dtype=np.float64), obs.shape)
    resid2 = (obs - mean) ** 2
    out = 0.0
    for r2, v in zip(resid2.ravel(), var.ravel()):
        if v > 0.0:
            out += r2 / v
        elif r2 > 0.0:
            return float("inf")
    return float(out)


def wilks_accept(obs, mean, var, alpha: float = 0.05) -> bool:
    obs = np.asarray(obs, dtype=np.float64)
    w = wilks_statistic(obs, mean, var)
    return w <= chi2_quantile(obs.size, alpha)
