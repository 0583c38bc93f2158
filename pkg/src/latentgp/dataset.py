"""Labelled input data, the centring transform and space-filling designs."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

from .errors import (
    DimensionMismatch,
    DuplicatePoint,
    EmptyBounds,
    MalformedRow,
    MissingFile,
    SingleClassData,
)


class ClassLabel(enum.Enum):
    """The two region labels. ``L1`` is the region where the latent value is negative."""

    L1 = "l1"
    L2 = "l2"

    @classmethod
    def parse(cls, text: str) -> "ClassLabel":
        return cls(text.strip().lower())

    @property
    def sign(self) -> int:
        return -1 if self is ClassLabel.L1 else 1


@dataclass(frozen=True)
class TransformRecord:
    """Affine map ``z = (x - shift) / scale`` applied per axis."""

    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        shift = np.atleast_1d(np.asarray(self.shift, dtype=float))
        scale = np.atleast_1d(np.asarray(self.scale, dtype=float))
        if shift.shape != scale.shape:
            raise DimensionMismatch("shift and scale must have the same length")
        if not np.all(scale > 0):
            raise ValueError("transform scales must be positive")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def identity(cls, p: int) -> "TransformRecord":
        return cls(np.zeros(p), np.ones(p))

    @property
    def p(self) -> int:
        return self.shift.size

    def apply(self, points) -> np.ndarray:
        pts = _as_points(points)
        if pts.shape[1] != self.p:
            raise DimensionMismatch(f"expected {self.p} coordinates, got {pts.shape[1]}")
        return (pts - self.shift) / self.scale

    def to_dict(self) -> dict:
        return {"shift": self.shift.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TransformRecord":
        return cls(np.array(d["shift"], dtype=float), np.array(d["scale"], dtype=float))


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


@dataclass(frozen=True)
class LabelledDataset:
    """n labelled input points in p dimensions.

    ``in_r1[i]`` is True when point i carries label L1. ``bounds`` has shape
    (p, 2) with rows ``(low, high)``.
    """

    points: np.ndarray
    in_r1: np.ndarray
    bounds: np.ndarray
    transform: TransformRecord | None = field(default=None)

    def __post_init__(self):
        pts = _as_points(self.points)
        in_r1 = np.asarray(self.in_r1, dtype=bool).reshape(-1)
        bounds = np.asarray(self.bounds, dtype=float).reshape(-1, 2)
        n, p = pts.shape
        if in_r1.size != n:
            raise DimensionMismatch(f"{n} points but {in_r1.size} labels")
        if bounds.shape[0] != p:
            raise DimensionMismatch(f"{p}-dimensional points but {bounds.shape[0]} bound pairs")
        if n < 2:
            raise SingleClassData("a dataset needs at least two points")
        if in_r1.all() or not in_r1.any():
            raise SingleClassData("both labels l1 and l2 must be present")
        if not np.all(np.isfinite(pts)):
            raise ValueError("input points must be finite")
        if np.any(bounds[:, 0] > bounds[:, 1]):
            raise EmptyBounds("every bound needs low <= high")
        tol = 1e-9 * np.maximum(1.0, np.abs(bounds).max(axis=1))
        if np.any(pts < bounds[:, 0] - tol) or np.any(pts > bounds[:, 1] + tol):
            raise ValueError("points must lie within the dataset bounds")
        dup = _first_duplicate(pts)
        if dup is not None:
            raise DuplicatePoint(f"points {dup[0]} and {dup[1]} coincide")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "in_r1", in_r1)
        object.__setattr__(self, "bounds", bounds)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]

    @property
    def labels(self) -> list[ClassLabel]:
        return [ClassLabel.L1 if r1 else ClassLabel.L2 for r1 in self.in_r1]

    @property
    def signs(self) -> np.ndarray:
        """-1 for L1 points, +1 for L2 points."""
        return np.where(self.in_r1, -1.0, 1.0)

    def counts(self) -> tuple[int, int]:
        n1 = int(self.in_r1.sum())
        return n1, self.n - n1


def _first_duplicate(pts: np.ndarray):
    """First pair of exactly equal rows (exact comparison, so tiny separations
    that underflow a squared distance still count as distinct)."""
    if pts.shape[0] < 2:
        return None
    order = np.lexsort(pts.T[::-1])
    s = pts[order]
    same = np.all(s[1:] == s[:-1], axis=1)
    if not same.any():
        return None
    pairs = [tuple(sorted((int(order[k]), int(order[k + 1])))) for k in np.flatnonzero(same)]
    return min(pairs)


def make_dataset(points, labels, bounds=None) -> LabelledDataset:
    """Build a dataset from points and labels (ClassLabel, "l1"/"l2" strings or booleans)."""
    pts = _as_points(points)
    in_r1 = np.array([_is_r1(lab) for lab in labels], dtype=bool)
    if bounds is None:
        bounds = np.column_stack([pts.min(axis=0), pts.max(axis=0)])
    return LabelledDataset(pts, in_r1, np.asarray(bounds, dtype=float))


def _is_r1(label) -> bool:
    if isinstance(label, ClassLabel):
        return label is ClassLabel.L1
    if isinstance(label, str):
        return ClassLabel.parse(label) is ClassLabel.L1
    return bool(label)


def load_dataset(path, p: int, bounds=None) -> LabelledDataset:
    """Read a CSV with header ``x1,...,xp,label``.

    Bounds default to the per-axis data range.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such data file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedRow(0, "empty file")
    header = [h.strip().lower() for h in rows[0]]
    expected = [f"x{k + 1}" for k in range(p)] + ["label"]
    if header != expected:
        raise MalformedRow(0, f"header {rows[0]} does not match {expected}")
    pts, labels = [], []
    for idx, row in enumerate(rows[1:], start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != p + 1:
            raise MalformedRow(idx, f"expected {p + 1} fields, got {len(row)}")
        try:
            coords = [float(c) for c in row[:p]]
        except ValueError as exc:
            raise MalformedRow(idx, str(exc)) from None
        if not all(np.isfinite(coords)):
            raise MalformedRow(idx, "non-finite coordinate")
        try:
            labels.append(ClassLabel.parse(row[p]))
        except ValueError:
            raise MalformedRow(idx, f"unknown label {row[p]!r}") from None
        pts.append(coords)
    if not pts:
        raise SingleClassData("data file contains no rows")
    return make_dataset(np.array(pts, dtype=float).reshape(-1, p), labels, bounds)


def save_dataset(d: LabelledDataset, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(d.p)] + ["label"])
        for x, lab in zip(d.points, d.labels):
            w.writerow([repr(float(v)) for v in x] + [lab.value])


def save_design(points, path) -> None:
    pts = _as_points(points)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(pts.shape[1])])
        w.writerows([[repr(float(v)) for v in x] for x in pts])


def center_dataset(d: LabelledDataset) -> tuple[LabelledDataset, TransformRecord]:
    """Send the midpoint of the two class centroids to the origin and give
    each axis a data range of 2."""
    c1 = d.points[d.in_r1].mean(axis=0)
    c2 = d.points[~d.in_r1].mean(axis=0)
    shift = 0.5 * (c1 + c2)
    span = d.points.max(axis=0) - d.points.min(axis=0)
    # a constant axis gets unit scale
    scale = np.where(span > 0, span / 2.0, 1.0)
    t = TransformRecord(shift, scale)
    z_bounds = (d.bounds - shift[:, None]) / scale[:, None]
    return LabelledDataset(t.apply(d.points), d.in_r1, z_bounds, transform=t), t


def inverse_transform(points, t: TransformRecord) -> np.ndarray:
    pts = _as_points(points)
    if pts.shape[1] != t.p:
        raise DimensionMismatch(f"expected {t.p} coordinates, got {pts.shape[1]}")
    return pts * t.scale + t.shift


def _check_bounds(bounds) -> np.ndarray:
    b = np.asarray(bounds, dtype=float).reshape(-1, 2)
    if np.any(b[:, 0] >= b[:, 1]):
        raise EmptyBounds("every bound needs low < high")
    return b


def _lhs_unit(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((n, p))
    perms = np.column_stack([rng.permutation(n) for _ in range(p)])
    return (perms + u) / n


def latin_hypercube(n: int, bounds, seed: int) -> np.ndarray:
    """Random Latin hypercube: every axis projection hits each of the n bins once."""
    if n < 1:
        raise ValueError("n must be at least 1")
    b = _check_bounds(bounds)
    rng = np.random.default_rng(seed)
    unit = _lhs_unit(n, b.shape[0], rng)
    return b[:, 0] + unit * (b[:, 1] - b[:, 0])


def min_distance(points) -> float:
    pts = _as_points(points)
    if pts.shape[0] < 2:
        return np.inf
    return float(pdist(pts).min())


def maximin_lhs(n: int, bounds, restarts: int, seed: int) -> np.ndarray:
    """Best of ``restarts`` Latin hypercubes by minimum pairwise distance.

    Candidates come from one stream seeded with ``seed``, so the first
    candidate equals ``latin_hypercube(n, bounds, seed)``.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    b = _check_bounds(bounds)
    rng = np.random.default_rng(seed)
    width = b[:, 1] - b[:, 0]
    best, best_d = None, -np.inf
    for _ in range(restarts):
        cand = b[:, 0] + _lhs_unit(n, b.shape[0], rng) * width
        dmin = min_distance(cand)
        if dmin > best_d:
            best, best_d = cand, dmin
    return best
