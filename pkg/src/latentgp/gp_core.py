"""Mean bases, the squared-exponential correlation and Gaussian conditioning.

The correlation between inputs x and y is ``exp(-sum_k (x_k - y_k)**2 / delta_k)``.
Training Gram matrices carry a small diagonal nugget ``eps``; cross
correlations between a prediction input and a training input at distance
exactly zero carry the same nugget, so conditional means interpolate the
latent values exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DimensionMismatch, NonPositiveLengthscale, NotPositiveDefinite

MACHINE_EPS = np.finfo(float).eps
DEFAULT_NUGGET_SCALE = 1e6
NUGGET_ESCALATION = 100.0
LOG_2PI = np.log(2.0 * np.pi)


class MeanBasis(enum.Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    QUADRATIC = "quadratic"

    @classmethod
    def parse(cls, text) -> "MeanBasis":
        if isinstance(text, MeanBasis):
            return text
        return cls(str(text).strip().lower())

    def size(self, p: int) -> int:
        return {MeanBasis.CONSTANT: 1, MeanBasis.LINEAR: 1 + p, MeanBasis.QUADRATIC: 1 + 2 * p}[self]


def basis_vector(x, basis: MeanBasis, p: int | None = None) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or (p is not None and x.size != p):
        raise DimensionMismatch(f"expected a point with {p} coordinates, got shape {x.shape}")
    return basis_matrix(x[None, :], basis)[0]


def basis_matrix(X, basis: MeanBasis) -> np.ndarray:
    """Rows are h(x)^T: intercept, then linear terms, then pure squares."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    ones = np.ones((X.shape[0], 1))
    if basis is MeanBasis.CONSTANT:
        return ones
    if basis is MeanBasis.LINEAR:
        return np.hstack([ones, X])
    return np.hstack([ones, X, X**2])


@dataclass(frozen=True)
class Hyperparameters:
    beta: np.ndarray
    sigma2: float
    delta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=float)))
        object.__setattr__(self, "delta", np.atleast_1d(np.asarray(self.delta, dtype=float)))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not np.all(self.delta > 0):
            raise NonPositiveLengthscale("every lengthscale delta_k must be positive")

    def replace(self, **kw) -> "Hyperparameters":
        d = {"beta": self.beta, "sigma2": self.sigma2, "delta": self.delta}
        d.update(kw)
        return Hyperparameters(**d)


def _check_delta(delta, p: int) -> np.ndarray:
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if delta.size == 1 and p > 1:
        delta = np.full(p, delta[0])
    if delta.size != p:
        raise DimensionMismatch(f"{delta.size} lengthscales for {p}-dimensional inputs")
    if not np.all(delta > 0):
        raise NonPositiveLengthscale("every lengthscale delta_k must be positive")
    return delta


def _as_2d(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def correlation(x, y, delta) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise DimensionMismatch("points have different dimensions")
    delta = _check_delta(delta, x.size)
    return float(np.exp(-np.sum((x - y) ** 2 / delta)))


def correlation_matrix(A, B, delta) -> np.ndarray:
    A, B = _as_2d(A), _as_2d(B)
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch("point sets have different dimensions")
    delta = _check_delta(delta, A.shape[1])
    sq = np.zeros((A.shape[0], B.shape[0]))
    for k in range(A.shape[1]):
        diff = A[:, k, None] - B[None, :, k]
        sq += diff * diff / delta[k]
    return np.exp(-sq)


def nugget_size(n: int, nugget_scale: float = DEFAULT_NUGGET_SCALE) -> float:
    return nugget_scale * n * MACHINE_EPS


def cholesky(A: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("Cholesky factorisation failed") from None


def jittered_cholesky(A: np.ndarray, jitter: float) -> tuple[np.ndarray, float]:
    """Factor ``A + jitter*I``, retrying once with the jitter escalated."""
    idx = np.diag_indices_from(A)
    for eps in (jitter, jitter * NUGGET_ESCALATION):
        B = A.copy()
        B[idx] += eps
        try:
            return np.linalg.cholesky(B), eps
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveDefinite(
        f"matrix not positive definite even with jitter {jitter * NUGGET_ESCALATION:.3g}"
    )


@dataclass(frozen=True)
class GramFactor:
    """Factorised training correlation matrix ``C' = C + eps*I = L L^T``."""

    X: np.ndarray
    delta: np.ndarray
    matrix: np.ndarray
    chol: np.ndarray
    precision: np.ndarray
    log_det: float
    nugget: float

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve((self.chol, True), b, check_finite=False)

    def whiten(self, b: np.ndarray) -> np.ndarray:
        """L^{-1} b."""
        return solve_triangular(self.chol, b, lower=True, check_finite=False)


def gram_factor(X, delta, nugget_scale: float = DEFAULT_NUGGET_SCALE) -> GramFactor:
    X = _as_2d(X)
    delta = _check_delta(delta, X.shape[1])
    C = correlation_matrix(X, X, delta)
    n = X.shape[0]
    L, eps = jittered_cholesky(C, nugget_size(n, nugget_scale))
    Cn = C.copy()
    Cn[np.diag_indices(n)] += eps
    Linv = solve_triangular(L, np.eye(n), lower=True, check_finite=False)
    Q = Linv.T @ Linv
    Q = 0.5 * (Q + Q.T)
    log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
    return GramFactor(X, delta, Cn, L, Q, log_det, eps)


def cross_correlation(Xs, gf: GramFactor) -> np.ndarray:
    """c(x*, X) with the training nugget added where x* coincides with a training input."""
    K = correlation_matrix(Xs, gf.X, gf.delta)
    same = np.all(_as_2d(Xs)[:, None, :] == gf.X[None, :, :], axis=2)
    if same.any():
        K[same] = 1.0 + gf.nugget
    return K


def conditional_mean(Xs, eta, th: Hyperparameters, basis: MeanBasis, gf: GramFactor) -> np.ndarray:
    Xs = _as_2d(Xs)
    Hs = basis_matrix(Xs, basis)
    H = basis_matrix(gf.X, basis)
    resid = np.asarray(eta, dtype=float) - H @ th.beta
    return Hs @ th.beta + cross_correlation(Xs, gf) @ gf.solve(resid)


def conditional_mvn(X, eta, th: Hyperparameters, Xs, gf: GramFactor, basis: MeanBasis):
    """Mean and covariance of the latent process at ``Xs`` given its values ``eta`` at ``X``.

    The covariance is ``sigma2 * (c(Xs,Xs) - c(Xs,X) C'^{-1} c(X,Xs) + eps*I)``.
    """
    X, Xs = _as_2d(X), _as_2d(Xs)
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (X.shape[0],) or gf.n != X.shape[0]:
        raise DimensionMismatch("eta, X and the Gram factor disagree on n")
    if Xs.shape[1] != X.shape[1]:
        raise DimensionMismatch("training and test inputs have different dimensions")
    mean = conditional_mean(Xs, eta, th, basis, gf)
    Kxs = correlation_matrix(Xs, X, th.delta)
    W = gf.whiten(Kxs.T)
    cov = correlation_matrix(Xs, Xs, th.delta) - W.T @ W
    cov = 0.5 * (cov + cov.T)
    cov[np.diag_indices_from(cov)] += gf.nugget
    return mean, th.sigma2 * cov


def mvn_draw(mean, cov, rng: np.random.Generator) -> np.ndarray:
    """One draw ``mean + L z``; the covariance must already include its nugget."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        # rounding can leave a PSD matrix a hair indefinite
        scale = max(float(np.max(np.abs(np.diag(cov)))), np.finfo(float).tiny)
        L, _ = jittered_cholesky(cov, nugget_size(cov.shape[0]) * scale)
    return mean + L @ rng.standard_normal(mean.shape[0])


def log_mvn_density(eta, th: Hyperparameters, H, gf: GramFactor) -> float:
    """log N(eta; H beta, sigma2 C') through the Cholesky factor."""
    r = np.asarray(eta, dtype=float) - np.asarray(H) @ th.beta
    if r.shape[0] != gf.n:
        raise DimensionMismatch("eta and Gram factor disagree on n")
    w = gf.whiten(r)
    n = r.shape[0]
    return float(-0.5 * (n * (LOG_2PI + np.log(th.sigma2)) + gf.log_det + w @ w / th.sigma2))
