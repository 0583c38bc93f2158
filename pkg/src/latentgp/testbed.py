"""The three worked examples: a 1-D threshold, a 2-D half-plane and Santner's annulus."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import ClassLabel, LabelledDataset, latin_hypercube, make_dataset, maximin_lhs

ONED_INPUTS = np.array([0, 1, 3, 5, 6, 8, 11, 12, 15, 17, 19, 20], dtype=float)
ONED_THRESHOLD = 7.0
PLANE_BOUNDS = [(-1.0, 7.0), (-1.0, 7.0)]
PLANE_THRESHOLD = 3.0


@dataclass(frozen=True)
class SantnerParams:
    a: np.ndarray = field(default_factory=lambda: np.array([3.0, 5.0]))
    Q: np.ndarray = field(default_factory=lambda: np.array([[2.0, 1.5], [1.5, 4.0]]))
    c1sq: float = 0.25**2
    c2sq: float = 0.75**2
    bounds: tuple = ((-1.25, 1.25), (-1.25, 1.25))


SANTNER = SantnerParams()


def example_1d() -> LabelledDataset:
    x = ONED_INPUTS
    return make_dataset(x, x < ONED_THRESHOLD, [(0.0, 20.0)])


def plane_label(x) -> ClassLabel:
    return ClassLabel.L1 if x[0] < PLANE_THRESHOLD else ClassLabel.L2


def example_2d_plane(seed: int = 0) -> LabelledDataset:
    pts = latin_hypercube(20, PLANE_BOUNDS, seed)
    return make_dataset(pts, pts[:, 0] < PLANE_THRESHOLD, PLANE_BOUNDS)


def santner_label(x, params: SantnerParams = SANTNER) -> ClassLabel:
    r2 = float(x[0]) ** 2 + float(x[1]) ** 2
    return ClassLabel.L1 if params.c1sq <= r2 <= params.c2sq else ClassLabel.L2


def santner_f(x, params: SantnerParams = SANTNER) -> float:
    """+inf inside the inner disc (boundary included), -inf from the outer circle
    outwards, and ``exp(-(a'x + x'Qx)) / (r^2 - c1^2)`` in between."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    if r2 <= params.c1sq:
        return np.inf
    if r2 >= params.c2sq:
        return -np.inf
    return float(np.exp(-(params.a @ x + x @ params.Q @ x)) / (r2 - params.c1sq))


def build_santner_dataset(seed: int = 0, n: int = 50, restarts: int = 1000) -> LabelledDataset:
    pts = maximin_lhs(n, SANTNER.bounds, restarts, seed)
    labels = [santner_label(x) for x in pts]
    return make_dataset(pts, labels, SANTNER.bounds)
