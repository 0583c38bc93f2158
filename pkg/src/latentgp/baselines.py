"""Comparators: plain logistic regression with marginal Bernoulli sampling, and
nearest-neighbour (Voronoi) classification."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .dataset import ClassLabel, LabelledDataset

MAX_IRLS_ITER = 100
IRLS_TOL = 1e-8


class PerfectSeparationWarning(UserWarning):
    pass


@dataclass
class LogisticModel:
    """``coeffs`` = (intercept, slopes); the modelled probability is P(L1)."""

    coeffs: np.ndarray
    converged: bool
    iterations: int
    separated: bool = False


def _design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.hstack([np.ones((X.shape[0], 1)), X])


def log_likelihood_gradient(coeffs, d: LabelledDataset) -> np.ndarray:
    A = _design(d.points)
    y = d.in_r1.astype(float)
    return A.T @ (y - expit(A @ coeffs))


def fit_logistic(d: LabelledDataset) -> LogisticModel:
    """Maximum likelihood by iteratively reweighted least squares, L1 coded as 1.

    Stops when the largest coefficient change drops below 1e-8 or after 100
    iterations. Perfectly separable data has no finite MLE; it is flagged with
    a :class:`PerfectSeparationWarning` and the iterate at the cap is returned
    with ``converged=False``.
    """
    A = _design(d.points)
    y = d.in_r1.astype(float)
    beta = np.zeros(A.shape[1])
    converged = False
    it = 0
    for it in range(1, MAX_IRLS_ITER + 1):
        prob = expit(A @ beta)
        w = prob * (1.0 - prob)
        grad = A.T @ (y - prob)
        hess = A.T @ (w[:, None] * A)
        step, *_ = np.linalg.lstsq(hess, grad, rcond=None)
        beta = beta + step
        if not np.all(np.isfinite(beta)):
            beta = beta - step
            break
        if np.max(np.abs(step)) < IRLS_TOL:
            converged = True
            break
    eta = A @ beta
    separated = bool(np.all((eta > 0) == (y > 0.5)) and np.all(np.abs(expit(eta) - y) < 1e-6))
    if separated:
        converged = False
        warnings.warn("data are perfectly separated; the logistic MLE does not exist",
                      PerfectSeparationWarning, stacklevel=2)
    return LogisticModel(beta, converged, it, separated)


def logistic_prob_field(model: LogisticModel, points) -> np.ndarray:
    """P(L1) at each point."""
    return expit(_design(points) @ model.coeffs)


def bernoulli_field_sample(probs, rng) -> np.ndarray:
    """Independent draws; True marks L1. Deliberately ignores spatial correlation."""
    probs = np.asarray(probs, dtype=float)
    return rng.random(probs.shape) < probs


def average_bernoulli(probs, count: int, rng) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be at least 1")
    probs = np.asarray(probs, dtype=float)
    total = np.zeros(probs.shape)
    for _ in range(count):
        total += bernoulli_field_sample(probs, rng)
    return total / count


def voronoi_classify(d: LabelledDataset, x) -> ClassLabel:
    return ClassLabel.L1 if voronoi_field(d, np.atleast_2d(x))[0] else ClassLabel.L2


def voronoi_field(d: LabelledDataset, points, chunk: int = 4096) -> np.ndarray:
    """Label of the Euclidean-nearest training point (True marks L1); ties go
    to the lowest training index."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None] if d.p == 1 else pts[None, :]
    nearest = np.empty(pts.shape[0], dtype=int)
    for start in range(0, pts.shape[0], chunk):
        block = pts[start:start + chunk]
        sq = np.sum((block[:, None, :] - d.points[None, :, :]) ** 2, axis=2)
        nearest[start:start + chunk] = np.argmin(sq, axis=1)  # first minimum wins
    return d.in_r1[nearest]
