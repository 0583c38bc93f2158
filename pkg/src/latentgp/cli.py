"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from pathlib import Path

from . import pipeline as pl
from .config import ConfigError, RunConfig, load_config, parse_grid
from .dataset import LabelledDataset, load_dataset
from .demos import DEMOS, demo_config, run_demo
from .errors import DataError, MalformedRow, MissingFile, NumericalError
from .inference import TraceSet

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _grid_spec(text: str) -> str:
    if not re.fullmatch(r"\d+(x\d+)*", text.strip().lower()):
        raise argparse.ArgumentTypeError(f"expected N or NxM..., got {text!r}")
    return text.strip().lower()


def _read_data(path) -> LabelledDataset:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such data file: {path}")
    with path.open(newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header or len(header) < 2:
        raise MalformedRow(0, "expected a header x1,...,xp,label")
    return load_dataset(path, len(header) - 1)


def _config(args, base: RunConfig | None = None) -> RunConfig:
    try:
        cfg = load_config(args.config, base)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    if getattr(args, "seed", None) is not None:
        cfg.mcmc.seed = args.seed
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolution(args, cfg: RunConfig, p: int) -> list:
    return parse_grid(args.grid, p) or cfg.grid.resolved(p)


def cmd_fit(args) -> int:
    cfg = _config(args)
    d = _read_data(args.data)
    trace = pl.fit(d, cfg)
    path = _out_dir(args) / "trace.jsonl"
    trace.save(path)
    print(f"fit: {len(trace)} samples written to {path}")
    for key, rate in trace.acceptance_rates.items():
        print(f"fit: acceptance {key} = {rate:.3f}")
    return EXIT_OK


def _trace_config(args, trace: TraceSet) -> RunConfig:
    """The config a trace was fitted with, overridden by --config if given."""
    base = RunConfig.from_dict(trace.config["run"]) if "run" in trace.config else RunConfig()
    return _config(args, base)


def cmd_predict(args) -> int:
    trace = TraceSet.load(args.trace)
    d = _read_data(args.data)
    cfg = _trace_config(args, trace)
    res = pl.predict(trace, d, cfg, _resolution(args, cfg, d.p), cfg.mcmc.seed)
    out = _out_dir(args)
    echo = cfg.to_dict()
    pl.write_field(out / "field.csv", res, echo)
    print(f"predict: {res.grid.m} grid points from {res.field.samples_used} samples")
    if res.boundary is not None:
        pl.write_json(out / "boundary.json", pl.boundary_payload(res.boundary, echo))
        b = res.boundary
        print(f"predict: boundary median {b.median:.4g}, 95% [{b.lower95:.4g}, {b.upper95:.4g}], "
              f"{b.excluded_draws} draws excluded")
    return EXIT_OK


def cmd_loo(args) -> int:
    trace = TraceSet.load(args.trace)
    d = _read_data(args.data)
    cfg = _trace_config(args, trace)
    report = pl.loo(trace, d)
    path = _out_dir(args) / "loo.csv"
    pl.write_loo(path, report, d.labels, cfg.to_dict())
    print(f"loo: {d.n} rates written to {path}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    cfg = _config(args)
    if args.samples is not None:
        if args.samples < 1:
            raise UsageError("--samples: must be at least 1")
        cfg.baseline_samples = args.samples
    d = _read_data(args.data)
    bounds = pl.grid_bounds(None, d, cfg)
    res = pl.baseline(args.method, d, bounds, _resolution(args, cfg, d.p),
                      cfg.baseline_samples, cfg.mcmc.seed, cfg.grid.extend)
    path = _out_dir(args) / f"baseline_{args.method}.csv"
    pl.write_baseline(path, res, cfg.to_dict())
    note = " (data perfectly separated)" if res.separated else ""
    print(f"baseline: {args.method} field on {res.grid.m} points written to {path}{note}")
    return EXIT_OK


def cmd_demo(args) -> int:
    if args.name not in DEMOS:
        raise UsageError(f"unknown demo {args.name!r}; choose from {', '.join(DEMOS)}")
    cfg = _config(args, demo_config(args.name))
    seed = args.seed if args.seed is not None else 0
    summary = run_demo(args.name, seed, _out_dir(args), cfg)
    print(f"demo: {args.name} seed {seed} written to {args.out}")
    if "boundary" in summary:
        print(f"demo: boundary median {summary['boundary']['median']:.4g}")
    if "beta0_posterior_mean" in summary:
        print(f"demo: posterior mean constant {summary['beta0_posterior_mean']:.4g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latentgp", description="Latent Gaussian-process classification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, data=True, trace=False, grid=False):
        if data:
            p.add_argument("--data", required=True, help="CSV with header x1,...,xp,label")
        if trace:
            p.add_argument("--trace", required=True, help="trace file written by fit")
        if grid:
            p.add_argument("--grid", type=_grid_spec, help="resolution per axis, e.g. 50x50")
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="overrides mcmc.seed")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("fit", help="run the sampler and write trace.jsonl")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="probability field (and 1-D boundary) from a trace")
    common(p, trace=True, grid=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("loo", help="leave-one-out misclassification rates")
    common(p, trace=True)
    p.set_defaults(func=cmd_loo)

    p = sub.add_parser("baseline", help="logistic or Voronoi comparator field")
    common(p, grid=True)
    p.add_argument("--method", required=True, choices=["logistic", "voronoi"])
    p.add_argument("--samples", type=int, help="Bernoulli fields averaged (logistic)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("demo", help="run a built-in example end to end")
    p.add_argument("name", help="one of: " + ", ".join(DEMOS))
    common(p, data=False)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"latentgp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    stage = args.command
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"{stage}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"{stage}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"{stage}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
