import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import cKDTree
from scipy.special import expit

from latentgp.baselines import (
    PerfectSeparationWarning,
    average_bernoulli,
    bernoulli_field_sample,
    fit_logistic,
    log_likelihood_gradient,
    logistic_prob_field,
    voronoi_classify,
    voronoi_field,
)
from latentgp.dataset import ClassLabel, make_dataset
from latentgp.prediction import adjacent_disagreement


def random_dataset(rng, n=30, p=2):
    pts = rng.uniform(-1, 1, (n, p))
    lab = rng.random(n) < 0.5
    lab[:2] = [True, False]
    return make_dataset(pts, lab)


def test_separable_data_flagged():
    d = make_dataset([-2.0, -1.0, 1.0, 2.0], ["l1", "l1", "l2", "l2"])
    with pytest.warns(PerfectSeparationWarning):
        m = fit_logistic(d)
    assert m.separated and not m.converged
    assert m.coeffs[1] < 0


def test_symmetric_data_gives_zero_intercept():
    # x -> -x with the labels swapped maps the data onto itself
    x = np.array([-3.0, -2.0, -1.0, -0.5])
    lab = ["l1", "l1", "l2", "l1"]
    swap = {"l1": "l2", "l2": "l1"}
    d = make_dataset(np.r_[x, -x], lab + [swap[v] for v in lab])
    m = fit_logistic(d)
    assert m.converged
    assert m.coeffs[0] == pytest.approx(0.0, abs=1e-6)


def test_gradient_vanishes_at_optimum():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(100, 2))
    lab = rng.random(100) < expit(0.5 + pts @ [1.0, -2.0])
    d = make_dataset(pts, lab)
    m = fit_logistic(d)
    assert m.converged and not m.separated
    assert np.abs(log_likelihood_gradient(m.coeffs, d)).max() < 1e-6


def test_prob_field_direct_formula():
    rng = np.random.default_rng(1)
    d = random_dataset(rng)
    m = fit_logistic(d)
    pts = rng.normal(size=(5, 2))
    direct = 1.0 / (1.0 + np.exp(-(m.coeffs[0] + pts @ m.coeffs[1:])))
    assert np.allclose(logistic_prob_field(m, pts), direct, rtol=0, atol=1e-12)
    # on the fitted hyperplane the probability is one half
    x0 = np.array([[0.0, -m.coeffs[0] / m.coeffs[2]]])
    assert logistic_prob_field(m, x0)[0] == pytest.approx(0.5)


def test_bernoulli_zero_and_one(rng):
    assert not bernoulli_field_sample(np.zeros(50), rng).any()
    assert bernoulli_field_sample(np.ones(50), rng).all()


def test_half_probability_field_is_incoherent(rng):
    lab = bernoulli_field_sample(np.full(2500, 0.5), rng)
    assert abs(adjacent_disagreement(lab, (50, 50)) - 0.5) < 0.02


def test_bernoulli_fields_have_no_lag_one_correlation(rng):
    fields = np.array([bernoulli_field_sample(np.full(400, 0.3), rng) for _ in range(1000)], float)
    a, b = fields[:, :-1].ravel(), fields[:, 1:].ravel()
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_bernoulli_exchangeable_across_equal_cells(rng):
    # permutation test on the difference in mean between the two halves
    fields = np.array([bernoulli_field_sample(np.full(40, 0.4), rng) for _ in range(500)], float)
    counts = fields.sum(axis=0)
    obs = counts[:20].mean() - counts[20:].mean()
    perm = [np.subtract(*[c.mean() for c in np.split(rng.permutation(counts), 2)]) for _ in range(2000)]
    assert np.mean(np.abs(perm) >= abs(obs)) > 0.01


def test_average_converges(rng):
    probs = np.full(200, 0.3)
    assert np.all(np.abs(average_bernoulli(probs, 1000, rng) - 0.3) < 0.05)
    one = average_bernoulli(probs, 1, rng)
    assert set(np.unique(one)) <= {0.0, 1.0}
    devs = [np.abs(average_bernoulli(probs, c, rng) - probs).max() for c in (100, 1000, 10000)]
    assert devs[0] > devs[1] > devs[2]
    with pytest.raises(ValueError):
        average_bernoulli(probs, 0, rng)


def test_voronoi_midpoint_rule():
    d = make_dataset([0.0, 10.0], ["l1", "l2"])
    assert voronoi_classify(d, [4.9]) is ClassLabel.L1
    assert voronoi_classify(d, [5.1]) is ClassLabel.L2


def test_voronoi_tie_goes_to_lowest_index():
    pts = np.array([[5.0, 5.0], [9.0, 9.0], [-1.0, 0.0], [7.0, 7.0], [8.0, 8.0], [1.0, 0.0]])
    lab = ["l1", "l1", "l2", "l1", "l1", "l1"]
    d = make_dataset(pts, lab)
    assert voronoi_classify(d, [0.0, 0.0]) is ClassLabel.L2


def test_voronoi_training_points_keep_labels():
    rng = np.random.default_rng(2)
    d = random_dataset(rng, n=60, p=3)
    assert np.array_equal(voronoi_field(d, d.points), d.in_r1)


def test_voronoi_equals_kd_tree_nearest_neighbour():
    rng = np.random.default_rng(3)
    d = random_dataset(rng, n=80, p=2)
    q = rng.uniform(-1.2, 1.2, (10_000, 2))
    _, idx = cKDTree(d.points).query(q)
    assert np.array_equal(voronoi_field(d, q), d.in_r1[idx])


@given(st.integers(0, 2**31))
def test_voronoi_boundary_through_midpoint(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-1, 1, (2, 2))
    d = make_dataset(np.array([a, b]), ["l1", "l2"])
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if voronoi_field(d, (a + mid * (b - a))[None, :])[0]:
            lo = mid
        else:
            hi = mid
    assert abs(lo - 0.5) < 1e-9


@given(st.integers(0, 2**31))
def test_logistic_field_monotone_along_coefficients(seed):
    rng = np.random.default_rng(seed)
    d = random_dataset(rng)
    m = fit_logistic(d)
    direction = m.coeffs[1:] / np.linalg.norm(m.coeffs[1:])
    t = np.linspace(-3, 3, 50)
    probs = logistic_prob_field(m, t[:, None] * direction)
    assert np.all(np.diff(probs) >= 0)
