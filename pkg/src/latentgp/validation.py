"""Leave-one-out misclassification rates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .dataset import LabelledDataset
from .errors import DimensionMismatch, EmptyTrace
from .gp_core import basis_matrix, gram_factor
from .inference import TraceSet, full_conditionals


@dataclass
class MisclassReport:
    indices: np.ndarray
    points: np.ndarray
    in_r1: np.ndarray
    rates: np.ndarray
    log_rates: np.ndarray


def loo_misclassification(trace: TraceSet, d: LabelledDataset) -> MisclassReport:
    """Posterior probability that each held-out latent value takes the wrong sign.

    For each sample the untruncated conditional N(mu_i, s_i^2) of eta_i given the
    other latent values is formed and the probability mass on the wrong side of
    zero is averaged over samples. Averages are taken in log space so that rates
    far below the double-precision underflow threshold stay strictly positive.
    """
    if len(trace) == 0:
        raise EmptyTrace("the trace holds no samples")
    if trace.n != d.n or trace.p != d.p:
        raise DimensionMismatch("trace and data disagree on n or p")
    H = basis_matrix(d.points, trace.basis)
    nugget_scale = trace.config.get("mcmc", {}).get("nugget_scale", 1e6)
    # wrong side: eta_i >= 0 for L1, eta_i < 0 for L2
    flip = np.where(d.in_r1, 1.0, -1.0)
    logs = np.empty((len(trace), d.n))
    for s in range(len(trace)):
        th = trace.hyperparameters(s)
        gf = gram_factor(d.points, th.delta, nugget_scale)
        mu, sd = full_conditionals(trace.eta[s], th, gf, H)
        logs[s] = log_ndtr(flip * mu / sd)
    top = logs.max(axis=0)
    log_rates = top + np.log(np.mean(np.exp(logs - top), axis=0))
    return MisclassReport(
        indices=np.arange(d.n),
        points=d.points.copy(),
        in_r1=d.in_r1.copy(),
        rates=np.exp(log_rates),
        log_rates=log_rates,
    )


def sampled_misclassification(trace: TraceSet, d: LabelledDataset, rng, draws: int = 1):
    """Indicator form: draw eta_i from its conditional and count sign errors."""
    H = basis_matrix(d.points, trace.basis)
    nugget_scale = trace.config.get("mcmc", {}).get("nugget_scale", 1e6)
    wrong = np.zeros(d.n)
    for s in range(len(trace)):
        th = trace.hyperparameters(s)
        gf = gram_factor(d.points, th.delta, nugget_scale)
        mu, sd = full_conditionals(trace.eta[s], th, gf, H)
        e = mu + sd * rng.standard_normal((draws, d.n))
        wrong += np.sum((e < 0) != d.in_r1, axis=0)
    return wrong / (len(trace) * draws)



