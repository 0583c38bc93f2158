import numpy as np
import pytest

from latentgp.dataset import ClassLabel
from latentgp.testbed import (
    SANTNER,
    build_santner_dataset,
    example_1d,
    example_2d_plane,
    plane_label,
    santner_f,
    santner_label,
)


def test_oned_example():
    d = example_1d()
    assert d.n == 12 and d.counts() == (5, 7)
    x = d.points[:, 0]
    assert d.in_r1[x == 6][0] and not d.in_r1[x == 8][0]
    assert np.array_equal(d.bounds, [[0.0, 20.0]])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_plane_example(seed):
    d = example_2d_plane(seed)
    assert d.n == 20 and np.array_equal(d.bounds, [[-1, 7], [-1, 7]])
    assert np.array_equal(d.in_r1, d.points[:, 0] < 3)


def test_plane_label_convention():
    assert plane_label([2.9, 100.0]) is ClassLabel.L1
    assert plane_label([3.0, -5.0]) is ClassLabel.L2


def test_santner_params():
    assert np.allclose(SANTNER.Q, SANTNER.Q.T)
    assert np.all(np.linalg.eigvalsh(SANTNER.Q) > 0)
    assert 0 < SANTNER.c1sq < SANTNER.c2sq


def test_santner_label_examples():
    assert santner_label([0.5, 0.0]) is ClassLabel.L1
    assert santner_label([0.0, 0.0]) is ClassLabel.L2
    assert santner_label([1.0, 1.0]) is ClassLabel.L2


def test_santner_f_examples():
    assert santner_f([0.0, 0.0]) == np.inf
    assert santner_f([1.0, 1.0]) == -np.inf
    x = np.array([0.5, 0.0])
    # a'x = 1.5 and x'Qx = 0.5 at this point
    assert SANTNER.a @ x == pytest.approx(1.5) and x @ SANTNER.Q @ x == pytest.approx(0.5)
    assert santner_f(x) == pytest.approx(np.exp(-2.0) / 0.1875)


def test_santner_f_finite_exactly_on_l1():
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1.25, 1.25, (5000, 2)):
        assert np.isfinite(santner_f(x)) == (santner_label(x) is ClassLabel.L1)


def test_inner_circle_convention():
    x = np.array([0.25, 0.0])
    assert santner_label(x) is ClassLabel.L1 and santner_f(x) == np.inf


@pytest.mark.parametrize("seed", range(10))
def test_santner_design_has_both_labels(seed):
    d = build_santner_dataset(seed)
    assert d.n == 50 and 0 < d.counts()[0] < 50
    assert all((lab is ClassLabel.L1) == r for lab, r in
               zip([santner_label(x) for x in d.points], d.in_r1))


def test_santner_design_is_deterministic():
    a = build_santner_dataset(3, restarts=100)
    b = build_santner_dataset(3, restarts=100)
    assert np.array_equal(a.points, b.points)
