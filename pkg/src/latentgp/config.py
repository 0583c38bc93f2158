"""Run configuration: one JSON document, every field optional."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .gp_core import MeanBasis
from .inference import McmcConfig, PriorSpec


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field."""


@dataclass
class GridConfig:
    resolution: list | None = None
    extend: float = 0.0
    bounds: list | None = None

    def resolved(self, p: int) -> list:
        if self.resolution is None:
            return [401] if p == 1 else [50] * p if p == 2 else [10] * p
        res = list(self.resolution) if isinstance(self.resolution, (list, tuple)) else [self.resolution] * p
        if len(res) != p:
            raise ConfigError(f"grid.resolution: expected {p} values, got {len(res)}")
        return [int(r) for r in res]


@dataclass
class RunConfig:
    mean_basis: str = "linear"
    center: bool = True
    prior: dict = field(default_factory=dict)
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    chains: int = 1
    grid: GridConfig = field(default_factory=GridConfig)
    predict_max_samples: int | None = 1000
    baseline_samples: int = 1000

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            MeanBasis.parse(self.mean_basis)
        except ValueError:
            raise ConfigError(f"mean_basis: unknown basis {self.mean_basis!r}") from None
        unknown = set(self.prior) - {f.name for f in fields(PriorSpec)}
        if unknown:
            raise ConfigError(f"prior.{sorted(unknown)[0]}: unknown prior field")
        if self.chains < 1:
            raise ConfigError("chains: must be at least 1")
        if self.predict_max_samples is not None and self.predict_max_samples < 1:
            raise ConfigError("predict_max_samples: must be at least 1")
        if self.baseline_samples < 1:
            raise ConfigError("baseline_samples: must be at least 1")
        res = self.grid.resolution
        if res is not None:
            vals = res if isinstance(res, (list, tuple)) else [res]
            if any(int(r) < 2 for r in vals):
                raise ConfigError("grid.resolution: must be at least 2 per axis")
        if self.grid.extend < 0:
            raise ConfigError("grid.extend: must be non-negative")

    @property
    def basis(self) -> MeanBasis:
        return MeanBasis.parse(self.mean_basis)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"{sorted(unknown)[0]}: unknown configuration field")
        try:
            mcmc = McmcConfig.from_dict(d.pop("mcmc", {}) or {})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"mcmc.{exc}") from None
        grid_d = d.pop("grid", {}) or {}
        bad = set(grid_d) - {f.name for f in fields(GridConfig)}
        if bad:
            raise ConfigError(f"grid.{sorted(bad)[0]}: unknown grid field")
        try:
            return cls(mcmc=mcmc, grid=GridConfig(**grid_d), **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Read a JSON config; omitted fields fall back to ``base`` (module defaults if None)."""
    base = base or RunConfig()
    if path is None:
        return RunConfig.from_dict(base.to_dict())
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such config file: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    for key in ("mcmc", "grid", "prior"):
        if key in raw and not isinstance(raw[key], dict):
            raise ConfigError(f"{key}: must be a JSON object")
    unknown = set(raw) - {f.name for f in fields(RunConfig)}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown configuration field")
    return RunConfig.from_dict(_merge(base.to_dict(), raw))


def parse_grid(spec: str | None, p: int) -> list | None:
    """``"50x50"`` or ``"401"`` to a per-axis resolution list."""
    if spec is None:
        return None
    try:
        res = [int(v) for v in spec.lower().split("x")]
    except ValueError:
        raise ConfigError(f"--grid: cannot parse {spec!r}") from None
    if len(res) == 1:
        res = res * p
    if len(res) != p:
        raise ConfigError(f"--grid: {len(res)} resolutions for {p}-dimensional data")
    if any(r < 2 for r in res):
        raise ConfigError("--grid: resolution must be at least 2 per axis")
    return res
