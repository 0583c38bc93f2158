import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from latentgp.errors import NonPositiveScale
from latentgp.truncated import (
    TAIL_SWITCH,
    Truncation,
    lower_truncated_moments,
    mills_ratio,
    sample_tn,
    sample_tn_batch,
    tn_moments,
)

mp = pytest.importorskip("mpmath")


def exact_lower_moments(a):
    """Mean and variance of Z | Z >= a at 40 digits."""
    mp.mp.dps = 40
    a = mp.mpf(a)
    tail = mp.ncdf(-a)
    pdf = mp.npdf(a)
    m = pdf / tail
    v = 1 + a * m - m * m
    return float(m), float(v)


@pytest.mark.parametrize("a", [-30.0, -5.0, -1.0, 0.0, 0.5, 3.9, 4.1, 10.0, 29.9, 30.1, 60.0, 500.0])
def test_moments_match_high_precision(a):
    m, v = lower_truncated_moments(a)
    m0, v0 = exact_lower_moments(a)
    assert m == pytest.approx(m0, rel=1e-12)
    assert v == pytest.approx(v0, rel=1e-9)


def test_mills_ratio_far_tail_has_no_overflow():
    assert mills_ratio(1e4) == pytest.approx(1e4, rel=1e-6)
    assert np.isfinite(mills_ratio(-40.0))


@pytest.mark.parametrize("t", list(Truncation))
def test_moments_respect_the_sign(t):
    for mu in (-12.0, 0.0, 12.0):
        mean, var = tn_moments(mu, 2.0, t)
        assert (mean < 0) if t is Truncation.NEGATIVE else (mean >= 0)
        assert var > 0


@given(st.floats(-50, 50), st.floats(1e-3, 1e3), st.integers(0, 2**31))
def test_scalar_draws_stay_on_their_side(mu, s, seed):
    rng = np.random.default_rng(seed)
    assert sample_tn(mu, s, Truncation.NEGATIVE, rng) < 0.0
    assert sample_tn(mu, s, Truncation.NON_NEGATIVE, rng) >= 0.0


def test_nonpositive_scale_rejected(rng):
    with pytest.raises(NonPositiveScale):
        sample_tn(0.0, 0.0, Truncation.NEGATIVE, rng)
    with pytest.raises(NonPositiveScale):
        sample_tn_batch(0.0, -1.0, Truncation.NEGATIVE, rng, 3)


@pytest.mark.parametrize("r", [-12.0, -1.0, 0.0, 1.0, 4.0, 12.0])
def test_batch_and_scalar_share_a_distribution(r):
    rng = np.random.default_rng(99)
    t = Truncation.NON_NEGATIVE
    scalar = np.array([sample_tn(r, 1.0, t, rng) for _ in range(5000)])
    batch = sample_tn_batch(r, 1.0, t, rng, 5000)
    assert ks_2samp(scalar, batch).pvalue > 1e-3


def test_regimes_agree_across_the_switch():
    # just below and above the switch the two samplers target the same law
    rng = np.random.default_rng(3)
    lo = sample_tn_batch(-(TAIL_SWITCH - 1e-9), 1.0, Truncation.NON_NEGATIVE, rng, 20000)
    hi = sample_tn_batch(-(TAIL_SWITCH + 1e-9), 1.0, Truncation.NON_NEGATIVE, rng, 20000)
    assert ks_2samp(lo, hi).pvalue > 1e-3


@pytest.mark.parametrize("t", list(Truncation))
@pytest.mark.parametrize("r", [-12.0, -4.0, -1.0, 0.0, 1.0, 4.0, 12.0])
def test_empirical_moments(r, t):
    rng = np.random.default_rng(11)
    n = 200_000
    x = sample_tn_batch(r * 0.7, 0.7, t, rng, n)
    mean, var = tn_moments(r * 0.7, 0.7, t)
    assert abs(x.mean() - mean) < 4 * np.sqrt(var / n)
    # SE of the sample variance uses the fourth central moment
    se_var = np.sqrt(max(np.mean((x - x.mean()) ** 4) - x.var() ** 2, 0.0) / n)
    assert abs(x.var() - var) < 4 * se_var
