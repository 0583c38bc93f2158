"""Normal draws restricted to one sign.

Standardised, every case reduces to a standard normal truncated below at
``a``. For ``a <= TAIL_SWITCH`` the inverse survival function is used; beyond
it, rejection from a shifted exponential proposal (Robert, 1995), which stays
exact arbitrarily far into the tail.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy.special import erfcx, ndtr, ndtri

from .errors import NonPositiveScale

TAIL_SWITCH = 4.0
_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class Truncation(enum.Enum):
    NEGATIVE = "negative"  # (-inf, 0), label L1
    NON_NEGATIVE = "non_negative"  # [0, inf), label L2

    @classmethod
    def for_label(cls, in_r1: bool) -> "Truncation":
        return cls.NEGATIVE if in_r1 else cls.NON_NEGATIVE


def _lower_tail_draw(a: float, rng: np.random.Generator) -> float:
    """Standard normal conditioned on z >= a."""
    if a <= TAIL_SWITCH:
        # P(Z >= z) = u * P(Z >= a)
        u = 1.0 - rng.random()  # (0, 1]
        z = -float(ndtri(u * float(ndtr(-a))))
        return max(z, a)
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        z = a + rng.exponential(1.0 / lam)
        if rng.random() <= math.exp(-0.5 * (z - lam) ** 2):
            return z


def sample_tn(mu: float, s: float, t: Truncation, rng: np.random.Generator) -> float:
    """Draw from N(mu, s^2) restricted to ``t``'s half-line."""
    if not s > 0:
        raise NonPositiveScale(f"scale must be positive, got {s}")
    if t is Truncation.NON_NEGATIVE:
        x = mu + s * _lower_tail_draw(-mu / s, rng)
        return x if x >= 0.0 else 0.0
    x = mu - s * _lower_tail_draw(mu / s, rng)
    # keep the open boundary open after rounding
    return x if x < 0.0 else -np.finfo(float).tiny


def _lower_tail_batch(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`_lower_tail_draw`: the same two regimes, elementwise."""
    z = np.empty(a.shape)
    body = a <= TAIL_SWITCH
    u = 1.0 - rng.random(int(body.sum()))
    z[body] = np.maximum(-ndtri(u * ndtr(-a[body])), a[body])
    todo = np.flatnonzero(~body)
    while todo.size:
        at = a[todo]
        lam = 0.5 * (at + np.sqrt(at * at + 4.0))
        cand = at + rng.exponential(1.0 / lam)
        ok = rng.random(todo.size) <= np.exp(-0.5 * (cand - lam) ** 2)
        z[todo[ok]] = cand[ok]
        todo = todo[~ok]
    return z


def sample_tn_batch(mu, s, t: Truncation, rng: np.random.Generator, size: int | None = None):
    """Many independent draws of :func:`sample_tn`; ``mu`` and ``s`` broadcast."""
    mu, s = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(s, dtype=float))
    if size is not None:
        mu, s = np.broadcast_to(mu, (size,)), np.broadcast_to(s, (size,))
    if not np.all(s > 0):
        raise NonPositiveScale("every scale must be positive")
    if t is Truncation.NON_NEGATIVE:
        x = mu + s * _lower_tail_batch(-mu / s, rng)
        return np.maximum(x, 0.0)
    x = mu - s * _lower_tail_batch(mu / s, rng)
    return np.where(x < 0.0, x, -np.finfo(float).tiny)


def mills_ratio(a: float) -> float:
    """phi(a) / (1 - Phi(a)), computed without cancellation."""
    return _SQRT_2_OVER_PI / float(erfcx(a / _SQRT2))


def lower_truncated_moments(a: float) -> tuple[float, float]:
    """Mean and variance of a standard normal conditioned on z >= a."""
    lam = mills_ratio(a)
    if a > 30.0:
        # asymptotic series avoids cancellation in 1 + a*lam - lam^2
        inv = 1.0 / (a * a)
        var = inv * (1.0 + inv * (-6.0 + inv * (50.0 + inv * (-518.0 + inv * (6354.0 - 89782.0 * inv)))))
    else:
        var = 1.0 + a * lam - lam * lam
    return lam, max(var, 0.0)


def tn_moments(mu: float, s: float, t: Truncation) -> tuple[float, float]:
    if not s > 0:
        raise NonPositiveScale(f"scale must be positive, got {s}")
    if t is Truncation.NON_NEGATIVE:
        m, v = lower_truncated_moments(-mu / s)
        return mu + s * m, s * s * v
    m, v = lower_truncated_moments(mu / s)
    return mu - s * m, s * s * v
