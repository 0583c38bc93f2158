"""The three built-in example problems, end to end."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import pipeline as pl
from .baselines import bernoulli_field_sample, voronoi_field
from .config import GridConfig, RunConfig
from .dataset import LabelledDataset, save_dataset
from .inference import McmcConfig
from .prediction import adjacent_disagreement
from .testbed import PLANE_BOUNDS, build_santner_dataset, example_1d, example_2d_plane

DEMOS = ("oned", "plane", "santner")


def demo_config(name: str) -> RunConfig:
    """Per-demo defaults. The 1-D chain runs longer: the LOO rates of the
    interior points are tiny and need many samples to order reliably."""
    if name == "oned":
        return RunConfig(mean_basis="linear", center=True,
                         mcmc=McmcConfig(iterations=40000, burnin=5000, thin=5),
                         grid=GridConfig(resolution=[401]))
    if name == "plane":
        return RunConfig(mean_basis="linear", center=True, grid=GridConfig(resolution=[50, 50]))
    if name == "santner":
        return RunConfig(mean_basis="constant", center=False, grid=GridConfig(resolution=[50, 50]))
    raise ValueError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")


def demo_dataset(name: str, seed: int) -> LabelledDataset:
    if name == "oned":
        return example_1d()
    if name == "plane":
        return example_2d_plane(seed)
    if name == "santner":
        return build_santner_dataset(seed)
    raise ValueError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")


def level_set_points(grid, values, level: float = 0.5) -> np.ndarray:
    """Linearly interpolated points where a 2-D tensor-grid field crosses ``level``,
    searched along both axes."""
    a0, a1 = grid.axes
    v = np.asarray(values).reshape(grid.shape) - level
    out = []
    above = v >= 0
    i, j = np.nonzero(above[1:, :] != above[:-1, :])
    w = v[i, j] / (v[i, j] - v[i + 1, j])
    out.extend(zip(a0[i] + w * (a0[i + 1] - a0[i]), a1[j]))
    i, j = np.nonzero(above[:, 1:] != above[:, :-1])
    w = v[i, j] / (v[i, j] - v[i, j + 1])
    out.extend(zip(a0[i], a1[j] + w * (a1[j + 1] - a1[j])))
    return np.array(out, dtype=float).reshape(-1, 2)


def _oned_summary(d, trace, pred, report) -> dict:
    order = np.argsort(-report.log_rates, kind="stable")
    top2 = [int(i) for i in order[:2]]
    others = np.setdiff1d(np.arange(d.n), top2)
    return {
        "boundary": pred.boundary.to_dict(),
        "boundary_interval_width": pred.boundary.upper95 - pred.boundary.lower95,
        "loo_top2_indices": top2,
        "loo_top2_x": [float(d.points[i, 0]) for i in top2],
        "loo_max_other_rate": float(report.rates[others].max()),
        "loo_min_other_log_rate": float(report.log_rates[others].min()),
        "loo_log10_rates": (report.log_rates / np.log(10.0)).tolist(),
    }


def _plane_summary(d, trace, pred, seed) -> dict:
    grid, prob = pred.grid, pred.field.prob_r1
    x1 = grid.points[:, 0]
    lo, hi = PLANE_BOUNDS[1]
    band = (lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
    pts = level_set_points(grid, prob, 0.5)
    central = pts[(pts[:, 1] >= band[0]) & (pts[:, 1] <= band[1])]
    # independent Bernoulli labels at p=0.5, the incoherent reference
    coin = bernoulli_field_sample(np.full(grid.m, 0.5), pl.stage_rng(seed, 3))
    dis = pred.field.disagreement
    return {
        "min_prob_r1_x1_lt_1": float(prob[x1 < 1].min()),
        "max_prob_r1_x1_gt_5": float(prob[x1 > 5].max()),
        "level_set_points_central": int(central.shape[0]),
        "level_set_max_abs_dev_from_3": (float(np.abs(central[:, 0] - 3.0).max())
                                         if central.size else None),
        "gp_draw_disagreement_mean": float(dis.mean()),
        "gp_draw_disagreement_max": float(dis.max()),
        "bernoulli_half_disagreement": adjacent_disagreement(coin, grid.shape),
    }


def _santner_summary(d, trace, report) -> dict:
    return {
        "beta0_posterior_mean": float(trace.beta[:, 0].mean()),
        "loo_mean_rate_l1": float(report.rates[d.in_r1].mean()),
        "loo_mean_rate_l2": float(report.rates[~d.in_r1].mean()),
        "n_l1": int(d.in_r1.sum()),
        "n_l2": int((~d.in_r1).sum()),
    }


def run_demo(name: str, seed: int = 0, out_dir=None, cfg: RunConfig | None = None) -> dict:
    """Generate, fit, predict, validate and run both baselines; return the summary.

    When ``out_dir`` is given every artifact is written there.
    """
    cfg = RunConfig.from_dict((cfg or demo_config(name)).to_dict())
    cfg.mcmc.seed = seed
    d = demo_dataset(name, seed)
    trace = pl.fit(d, cfg)
    res = cfg.grid.resolved(d.p)
    pred = pl.predict(trace, d, cfg, res, seed)
    report = pl.loo(trace, d)
    bounds = pl.grid_bounds(trace, d, cfg)
    logit = pl.baseline("logistic", d, bounds, res, cfg.baseline_samples, seed, cfg.grid.extend)
    voro = pl.baseline("voronoi", d, bounds, res, cfg.baseline_samples, seed, cfg.grid.extend)

    summary = {
        "demo": name,
        "seed": seed,
        "n": d.n,
        "p": d.p,
        "samples": len(trace),
        "samples_used_for_prediction": pred.field.samples_used,
        "acceptance_rates": trace.acceptance_rates,
        "beta_posterior_mean": trace.beta.mean(axis=0).tolist(),
        "logistic_avg_bernoulli_max_abs_dev": float(np.abs(logit.averaged - logit.prob_r1).max()),
        "logistic_separated": bool(logit.separated),
        "voronoi_training_agreement": bool(np.array_equal(voronoi_field(d, d.points), d.in_r1)),
    }
    if name == "oned":
        summary.update(_oned_summary(d, trace, pred, report))
    elif name == "plane":
        summary.update(_plane_summary(d, trace, pred, seed))
    else:
        summary.update(_santner_summary(d, trace, report))
    summary["config"] = cfg.to_dict()

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        echo = cfg.to_dict()
        save_dataset(d, out / "dataset.csv")
        trace.save(out / "trace.jsonl")
        pl.write_field(out / "field.csv", pred, echo)
        if pred.boundary is not None:
            pl.write_json(out / "boundary.json", pl.boundary_payload(pred.boundary, echo))
        pl.write_loo(out / "loo.csv", report, d.labels, echo)
        pl.write_baseline(out / "baseline_logistic.csv", logit, echo)
        pl.write_baseline(out / "baseline_voronoi.csv", voro, echo)
        pl.write_json(out / "summary.json", summary)
    return summary
