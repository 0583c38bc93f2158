"""Stage functions shared by the command line and the demos, plus file writers.

Every emitted coordinate is in the data's original units. CSV outputs start
with a ``#`` line carrying the effective configuration as JSON.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import (
    PerfectSeparationWarning,
    average_bernoulli,
    fit_logistic,
    logistic_prob_field,
    voronoi_field,
)
from .config import RunConfig
from .dataset import LabelledDataset, TransformRecord, center_dataset
from .errors import DimensionMismatch
from .inference import PriorSpec, TraceSet, default_prior, run_chains
from .prediction import (
    BoundarySummary1D,
    PredictionGrid,
    ProbabilityField,
    classify_grid,
    iter_predictive_draws,
    summarise_crossings,
)
from .validation import MisclassReport, loo_misclassification

# independent rng streams per stage, all derived from one seed
STREAM_PREDICT = 1
STREAM_BASELINE = 2


def stage_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def build_prior(d: LabelledDataset, cfg: RunConfig) -> PriorSpec:
    base = default_prior(d, cfg.basis, cfg.center).to_dict()
    return PriorSpec.from_dict({**base, **cfg.prior})


def fit(d: LabelledDataset, cfg: RunConfig) -> TraceSet:
    """Centre (if configured), build the prior and run the sampler."""
    dm = d
    t = TransformRecord.identity(d.p)
    if cfg.center:
        dm, t = center_dataset(d)
    prior = build_prior(dm, cfg)
    echo = {
        "run": cfg.to_dict(),
        "transform": t.to_dict(),
        "bounds": d.bounds.tolist(),
    }
    return run_chains(dm, cfg.basis, prior, cfg.mcmc, cfg.chains, echo)


def trace_transform(trace: TraceSet, p: int) -> TransformRecord:
    raw = trace.config.get("transform")
    return TransformRecord.from_dict(raw) if raw else TransformRecord.identity(p)


def model_dataset(trace: TraceSet, d: LabelledDataset) -> LabelledDataset:
    """``d`` in the coordinates the trace was fitted in."""
    if trace.n != d.n or trace.p != d.p:
        raise DimensionMismatch(
            f"trace has n={trace.n}, p={trace.p} but data has n={d.n}, p={d.p}")
    t = trace_transform(trace, d.p)
    bounds = (d.bounds - t.shift[:, None]) / t.scale[:, None]
    return LabelledDataset(t.apply(d.points), d.in_r1, bounds, transform=t)


def grid_bounds(trace: TraceSet | None, d: LabelledDataset, cfg: RunConfig) -> np.ndarray:
    if cfg.grid.bounds is not None:
        b = np.asarray(cfg.grid.bounds, dtype=float).reshape(-1, 2)
        if b.shape[0] != d.p:
            raise DimensionMismatch(f"grid.bounds has {b.shape[0]} axes for {d.p}-dimensional data")
        return b
    if trace is not None and "bounds" in trace.config:
        b = np.asarray(trace.config["bounds"], dtype=float).reshape(-1, 2)
        if b.shape[0] == d.p:
            return b
    return d.bounds


@dataclass
class PredictResult:
    grid: PredictionGrid  # original units
    field: ProbabilityField
    boundary: BoundarySummary1D | None


def predict(trace: TraceSet, d: LabelledDataset, cfg: RunConfig, resolution, seed: int,
            keep_draws: int = 0) -> PredictResult:
    dm = model_dataset(trace, d)
    t = dm.transform
    grid = PredictionGrid.tensor(grid_bounds(trace, d, cfg), resolution, cfg.grid.extend)
    zgrid = grid.transformed(t)
    used = trace.thinned(cfg.predict_max_samples)
    rng = stage_rng(seed, STREAM_PREDICT)
    if d.p == 1:
        # one pass yields both the probability field and the per-draw crossings
        draws = list(iter_predictive_draws(used, dm, zgrid, rng))
        arr = np.array(draws)
        field = ProbabilityField(grid, (arr < 0).mean(axis=0), arr.mean(axis=0), len(draws),
                                 draws=draws[:keep_draws])
        boundary = summarise_crossings(grid.points[:, 0], draws)
        return PredictResult(grid, field, boundary)
    field = classify_grid(used, dm, zgrid, rng, keep_draws=keep_draws)
    field.grid = grid
    return PredictResult(grid, field, None)


def loo(trace: TraceSet, d: LabelledDataset) -> MisclassReport:
    report = loo_misclassification(trace, model_dataset(trace, d))
    report.points = d.points.copy()
    return report


@dataclass
class BaselineResult:
    method: str
    grid: PredictionGrid
    prob_r1: np.ndarray
    averaged: np.ndarray | None = None
    coeffs: np.ndarray | None = None
    separated: bool = False


def baseline(method: str, d: LabelledDataset, bounds, resolution, samples: int,
             seed: int, extend: float = 0.0) -> BaselineResult:
    grid = PredictionGrid.tensor(bounds, resolution, extend)
    if method == "voronoi":
        return BaselineResult("voronoi", grid, voronoi_field(d, grid.points).astype(float))
    if method == "logistic":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PerfectSeparationWarning)
            model = fit_logistic(d)
        probs = logistic_prob_field(model, grid.points)
        avg = average_bernoulli(probs, samples, stage_rng(seed, STREAM_BASELINE))
        return BaselineResult("logistic", grid, probs, avg, model.coeffs, model.separated)
    raise ValueError(f"unknown baseline method {method!r}")


# ---------------------------------------------------------------- writers

def _num(v) -> str:
    return repr(float(v))


def _config_line(config: dict) -> str:
    return "# config=" + json.dumps(config, sort_keys=True) + "\n"


def _write_csv(path, header, rows, config: dict | None) -> None:
    with Path(path).open("w", newline="") as fh:
        if config is not None:
            fh.write(_config_line(config))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path) -> tuple[list, list]:
    """Header and rows of a CSV written here, skipping the ``#`` config line."""
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(ln for ln in fh if not ln.startswith("#"))]
    return rows[0], rows[1:]


def write_field(path, res: PredictResult, config: dict | None = None) -> None:
    pts = res.grid.points
    header = [f"x{k + 1}" for k in range(pts.shape[1])] + ["prob_r1", "mean_eta"]
    rows = ([_num(v) for v in x] + [_num(p), _num(m)]
            for x, p, m in zip(pts, res.field.prob_r1, res.field.mean_eta))
    _write_csv(path, header, rows, config)


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def boundary_payload(b: BoundarySummary1D, config: dict | None = None) -> dict:
    out = b.to_dict()
    if config is not None:
        out["config"] = config
    return out


def write_loo(path, report: MisclassReport, labels, config: dict | None = None) -> None:
    p = report.points.shape[1]
    header = ["index"] + [f"x{k + 1}" for k in range(p)] + ["label", "misclass_rate",
                                                            "log_misclass_rate"]
    rows = ([str(int(i))] + [_num(v) for v in x] + [lab.value, _num(r), _num(lr)]
            for i, x, lab, r, lr in zip(report.indices, report.points, labels,
                                        report.rates, report.log_rates))
    _write_csv(path, header, rows, config)


def write_baseline(path, res: BaselineResult, config: dict | None = None) -> None:
    pts = res.grid.points
    header = [f"x{k + 1}" for k in range(pts.shape[1])] + ["prob_r1"]
    if res.averaged is not None:
        header.append("avg_bernoulli_r1")
    rows = []
    for i, x in enumerate(pts):
        row = [_num(v) for v in x] + [_num(res.prob_r1[i])]
        if res.averaged is not None:
            row.append(_num(res.averaged[i]))
        rows.append(row)
    _write_csv(path, header, rows, config)
