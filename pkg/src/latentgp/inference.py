"""MCMC for the latent process and its hyperparameters.

Each iteration runs one or more sequential-scan Gibbs sweeps over the latent
values at the data, optional elliptical slice moves on the same block, a draw
of the mean coefficients from their Gaussian full conditional, and
componentwise random-walk Metropolis-Hastings steps on ``log sigma2`` and
``log delta_k``.

Single-site Gibbs alone crawls when the correlation is smooth, because every
full conditional is then pinned by its neighbours. The elliptical slice move
proposes along a whole prior ellipse and restores mixing; it targets the same
sign-constrained Gaussian, so either move alone is a valid kernel.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .dataset import LabelledDataset
from .errors import ChainFailure, DataError, EmptyTrace, NotPositiveDefinite, NumericalError
from .gp_core import (
    DEFAULT_NUGGET_SCALE,
    GramFactor,
    Hyperparameters,
    MeanBasis,
    basis_matrix,
    gram_factor,
    log_mvn_density,
)
from .truncated import Truncation, sample_tn

TARGET_ACCEPTANCE = 0.3
TRACE_FORMAT = "latentgp-trace/1"


class SignViolation(NumericalError):
    pass


@dataclass
class PriorSpec:
    """Independent priors: Gaussian on each beta_j, inverse gamma on sigma2 and each delta_k."""

    beta_mean: np.ndarray
    beta_var: np.ndarray
    sigma2_shape: float
    sigma2_scale: float
    delta_shape: float
    delta_scale: np.ndarray
    tight_intercept: bool = False

    def __post_init__(self):
        self.beta_mean = np.atleast_1d(np.asarray(self.beta_mean, dtype=float))
        self.beta_var = np.atleast_1d(np.asarray(self.beta_var, dtype=float))
        self.delta_scale = np.atleast_1d(np.asarray(self.delta_scale, dtype=float))
        if self.beta_mean.shape != self.beta_var.shape:
            raise ValueError("beta_mean and beta_var must have the same length")
        if not np.all(self.beta_var > 0):
            raise ValueError("beta_var entries must be positive")
        if not (self.sigma2_shape > 1 and self.delta_shape > 1):
            raise ValueError("inverse-gamma shapes must exceed 1")
        if not (self.sigma2_scale > 0 and np.all(self.delta_scale > 0)):
            raise ValueError("inverse-gamma scales must be positive")
        if self.tight_intercept and self.beta_var[0] > 0.25:
            raise ValueError("a tight intercept prior needs beta_var[0] <= 0.25")

    @property
    def q(self) -> int:
        return self.beta_mean.size

    @property
    def p(self) -> int:
        return self.delta_scale.size

    def to_dict(self) -> dict:
        return {
            "beta_mean": self.beta_mean.tolist(),
            "beta_var": self.beta_var.tolist(),
            "sigma2_shape": float(self.sigma2_shape),
            "sigma2_scale": float(self.sigma2_scale),
            "delta_shape": float(self.delta_shape),
            "delta_scale": self.delta_scale.tolist(),
            "tight_intercept": bool(self.tight_intercept),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PriorSpec":
        return cls(**d)


def default_prior(d: LabelledDataset, basis: MeanBasis, centered: bool) -> PriorSpec:
    """Weakly informative defaults scaled to the input domain.

    delta_k ~ IG(3, 2 (range_k/2)^2) has prior mean (range_k/2)^2; sigma2 ~ IG(3, 4)
    has prior mean 2; beta_j ~ N(0, 10^2) except a N(0, 0.5^2) intercept on centred data.
    """
    q = basis.size(d.p)
    span = d.bounds[:, 1] - d.bounds[:, 0]
    span = np.where(span > 0, span, 1.0)
    beta_var = np.full(q, 100.0)
    if centered:
        beta_var[0] = 0.25
    return PriorSpec(
        beta_mean=np.zeros(q),
        beta_var=beta_var,
        sigma2_shape=3.0,
        sigma2_scale=4.0,
        delta_shape=3.0,
        delta_scale=2.0 * (span / 2.0) ** 2,
        tight_intercept=centered,
    )


def log_invgamma(x: float, shape: float, scale: float) -> float:
    return shape * math.log(scale) - float(gammaln(shape)) - (shape + 1.0) * math.log(x) - scale / x


@dataclass
class McmcConfig:
    iterations: int = 10000
    burnin: int = 5000
    thin: int = 5
    seed: int = 0
    gibbs_sweeps_per_iter: int = 1
    ess_steps_per_iter: int = 1
    mh_step_sigma2: float = 0.5
    mh_step_delta: float = 0.5
    adapt: bool = True
    reverse_scan: bool = False
    nugget_scale: float = DEFAULT_NUGGET_SCALE

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.iterations < 1:
            raise ValueError("iterations: must be at least 1")
        if not 0 <= self.burnin < self.iterations:
            raise ValueError("burnin: must satisfy 0 <= burnin < iterations")
        if self.thin < 1:
            raise ValueError("thin: must be at least 1")
        if self.gibbs_sweeps_per_iter < 1:
            raise ValueError("gibbs_sweeps_per_iter: must be at least 1")
        if self.ess_steps_per_iter < 0:
            raise ValueError("ess_steps_per_iter: must be non-negative")
        if self.mh_step_sigma2 < 0 or self.mh_step_delta < 0:
            raise ValueError("mh_step_sigma2/mh_step_delta: step sizes must be non-negative")
        if not self.nugget_scale > 0:
            raise ValueError("nugget_scale: must be positive")

    @property
    def n_retained(self) -> int:
        return len(range(self.burnin, self.iterations, self.thin))

    @classmethod
    def from_dict(cls, d: dict) -> "McmcConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"{sorted(unknown)[0]}: unknown MCMC setting")
        return cls(**d)


@dataclass
class TraceSet:
    """Retained posterior samples, one row per sample."""

    eta: np.ndarray
    beta: np.ndarray
    sigma2: np.ndarray
    delta: np.ndarray
    iters: np.ndarray
    acceptance_rates: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sigma2 = np.asarray(self.sigma2, dtype=float).reshape(-1)
        s = self.sigma2.size
        for name in ("eta", "beta", "delta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            setattr(self, name, arr if arr.ndim == 2 else arr.reshape(s, -1))
        self.iters = np.asarray(self.iters, dtype=int)

    def __len__(self) -> int:
        return self.sigma2.shape[0]

    @property
    def n(self) -> int:
        return self.eta.shape[1]

    @property
    def p(self) -> int:
        return self.delta.shape[1]

    @property
    def basis(self) -> MeanBasis:
        return MeanBasis.parse(self.config.get("basis", "linear"))

    def hyperparameters(self, s: int) -> Hyperparameters:
        return Hyperparameters(self.beta[s], self.sigma2[s], self.delta[s])

    def subset(self, idx) -> "TraceSet":
        idx = np.asarray(idx)
        return TraceSet(
            self.eta[idx], self.beta[idx], self.sigma2[idx], self.delta[idx], self.iters[idx],
            dict(self.acceptance_rates), dict(self.config),
        )

    def thinned(self, max_samples: int | None) -> "TraceSet":
        """Evenly spaced subset of at most ``max_samples`` samples."""
        if max_samples is None or len(self) <= max_samples:
            return self
        idx = np.unique(np.linspace(0, len(self) - 1, max_samples).round().astype(int))
        return self.subset(idx)

    @classmethod
    def merge(cls, traces: list["TraceSet"]) -> "TraceSet":
        if not traces:
            raise EmptyTrace("nothing to merge")
        rates = {}
        for key in traces[0].acceptance_rates:
            rates[key] = float(np.mean([t.acceptance_rates[key] for t in traces]))
        cfg = dict(traces[0].config)
        cfg["chains"] = len(traces)
        return cls(
            np.vstack([t.eta for t in traces]),
            np.vstack([t.beta for t in traces]),
            np.concatenate([t.sigma2 for t in traces]),
            np.vstack([t.delta for t in traces]),
            np.concatenate([t.iters for t in traces]),
            rates,
            cfg,
        )

    def save(self, path) -> None:
        header = dict(self.config)
        header["format"] = TRACE_FORMAT
        header["acceptance_rates"] = self.acceptance_rates
        header["n"], header["p"], header["q"] = self.n, self.p, self.beta.shape[1]
        with Path(path).open("w") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for s in range(len(self)):
                rec = {
                    "iter": int(self.iters[s]),
                    "beta": self.beta[s].tolist(),
                    "sigma2": float(self.sigma2[s]),
                    "delta": self.delta[s].tolist(),
                    "eta": self.eta[s].tolist(),
                }
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def load(cls, path) -> "TraceSet":
        path = Path(path)
        if not path.is_file():
            from .errors import MissingFile

            raise MissingFile(f"no such trace file: {path}")
        lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
        if not lines:
            raise EmptyTrace(f"trace file {path} is empty")
        try:
            header = json.loads(lines[0])
            recs = [json.loads(ln) for ln in lines[1:]]
        except json.JSONDecodeError as exc:
            raise DataError(f"trace file {path} is not JSON lines: {exc}") from None
        if not isinstance(header, dict) or header.get("format") != TRACE_FORMAT:
            raise DataError(f"trace file {path} lacks a {TRACE_FORMAT} header")
        if not recs:
            raise EmptyTrace(f"trace file {path} holds no samples")
        rates = header.pop("acceptance_rates", {})
        for key in ("format", "n", "p", "q"):
            header.pop(key, None)
        try:
            return cls(
                np.array([r["eta"] for r in recs], dtype=float),
                np.array([r["beta"] for r in recs], dtype=float),
                np.array([r["sigma2"] for r in recs], dtype=float),
                np.array([r["delta"] for r in recs], dtype=float),
                np.array([r["iter"] for r in recs], dtype=int),
                rates,
                header,
            )
        except (KeyError, ValueError) as exc:
            raise DataError(f"malformed trace record in {path}: {exc}") from None


def check_signs(eta: np.ndarray, in_r1: np.ndarray) -> None:
    bad = np.flatnonzero((eta < 0) != in_r1)
    if bad.size:
        raise SignViolation(f"latent value {bad[0]} has the wrong sign for its label")


def init_state(d: LabelledDataset, prior: PriorSpec, rng: np.random.Generator):
    """Hyperparameters from their priors; latent values from N(0, sigma2) folded onto
    each point's half-line."""
    beta = prior.beta_mean + np.sqrt(prior.beta_var) * rng.standard_normal(prior.q)
    sigma2 = prior.sigma2_scale / rng.gamma(prior.sigma2_shape)
    delta = prior.delta_scale / rng.gamma(prior.delta_shape, size=prior.p)
    z = np.abs(rng.standard_normal(d.n)) * math.sqrt(sigma2)
    eta = np.where(d.in_r1, -z, z)
    # a zero draw would sit on the wrong side for L1
    eta[(eta == 0) & d.in_r1] = -np.finfo(float).tiny
    return eta, Hyperparameters(beta, sigma2, delta)


def full_conditionals(eta, th: Hyperparameters, gf: GramFactor, H) -> tuple[np.ndarray, np.ndarray]:
    """Mean and sd of every eta_i given all the others."""
    Q = gf.precision
    m = H @ th.beta
    qd = np.diag(Q)
    r = eta - m
    mu = m - (Q @ r - qd * r) / qd
    return mu, np.sqrt(th.sigma2 / qd)


def gibbs_sweep(eta, th: Hyperparameters, gf: GramFactor, in_r1, H, rng, reverse: bool = False):
    """One sequential scan; each coordinate uses the freshest values of the others."""
    eta = np.array(eta, dtype=float)
    Q = gf.precision
    qd = np.diag(Q)
    m = H @ th.beta
    r = eta - m
    sd = np.sqrt(th.sigma2 / qd)
    n = eta.size
    order = range(n - 1, -1, -1) if reverse else range(n)
    for i in order:
        qi = Q[i]
        mu_i = m[i] - (qi @ r - qd[i] * r[i]) / qd[i]
        t = Truncation.NEGATIVE if in_r1[i] else Truncation.NON_NEGATIVE
        eta[i] = sample_tn(mu_i, sd[i], t, rng)
        r[i] = eta[i] - m[i]
    return eta


def elliptical_slice(eta, th: Hyperparameters, gf: GramFactor, in_r1, H, rng,
                     max_shrink: int = 500) -> np.ndarray:
    """Elliptical slice step (Murray, Adams & MacKay 2010) for N(H beta, sigma2 C')
    restricted to the label orthant; the likelihood is the orthant indicator."""
    m = H @ th.beta
    f = eta - m
    nu = math.sqrt(th.sigma2) * (gf.chol @ rng.standard_normal(eta.size))
    angle = rng.uniform(0.0, 2.0 * math.pi)
    lo, hi = angle - 2.0 * math.pi, angle
    for _ in range(max_shrink):
        cand = m + f * math.cos(angle) + nu * math.sin(angle)
        if np.array_equal(cand < 0, in_r1):
            return cand
        if angle < 0:
            lo = angle
        else:
            hi = angle
        angle = rng.uniform(lo, hi)
    return np.array(eta, dtype=float)


def beta_conditional(eta, th: Hyperparameters, gf: GramFactor, H, prior: PriorSpec):
    """Mean and covariance of beta given eta, sigma2 and delta."""
    QH = gf.solve(H)
    prec = H.T @ QH / th.sigma2 + np.diag(1.0 / prior.beta_var)
    rhs = QH.T @ eta / th.sigma2 + prior.beta_mean / prior.beta_var
    cov = np.linalg.inv(prec)
    return cov @ rhs, 0.5 * (cov + cov.T), prec, rhs


def update_beta(eta, th: Hyperparameters, gf: GramFactor, H, prior: PriorSpec, rng) -> np.ndarray:
    _, _, prec, rhs = beta_conditional(eta, th, gf, H, prior)
    try:
        R = np.linalg.cholesky(prec)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("beta full-conditional precision is not positive definite") from None
    # prec = R R^T: mean = prec^{-1} rhs, draw = mean + R^{-T} z
    mean = np.linalg.solve(R.T, np.linalg.solve(R, rhs))
    return mean + np.linalg.solve(R.T, rng.standard_normal(rhs.size))


def log_scale_posterior(eta, th: Hyperparameters, gf: GramFactor, H, prior: PriorSpec) -> float:
    """Log density of (log sigma2, log delta) up to a constant, given eta and beta."""
    lp = log_mvn_density(eta, th, H, gf)
    lp += log_invgamma(th.sigma2, prior.sigma2_shape, prior.sigma2_scale) + math.log(th.sigma2)
    for dk, bk in zip(th.delta, prior.delta_scale):
        lp += log_invgamma(dk, prior.delta_shape, bk) + math.log(dk)
    return lp


def mh_update_scale_params(eta, th: Hyperparameters, gf: GramFactor, prior: PriorSpec, H, X,
                           steps, rng, nugget_scale: float = DEFAULT_NUGGET_SCALE):
    """Componentwise random-walk MH on log sigma2 then each log delta_k.

    ``steps`` holds the proposal sd for sigma2 followed by one per delta_k.
    Returns the new hyperparameters, the (possibly rebuilt) Gram factor and
    one acceptance flag per component.
    """
    accepted = np.zeros(1 + th.delta.size, dtype=bool)
    current = log_scale_posterior(eta, th, gf, H, prior)

    prop = th.replace(sigma2=th.sigma2 * math.exp(steps[0] * rng.standard_normal()))
    cand = log_scale_posterior(eta, prop, gf, H, prior)
    if math.log(1.0 - rng.random()) <= cand - current:
        th, current, accepted[0] = prop, cand, True

    for k in range(th.delta.size):
        delta = th.delta.copy()
        delta[k] *= math.exp(steps[1 + k] * rng.standard_normal())
        u = math.log(1.0 - rng.random())
        if steps[1 + k] == 0:
            accepted[1 + k] = True
            continue
        try:
            gf_new = gram_factor(X, delta, nugget_scale)
        except NotPositiveDefinite:
            continue
        prop = th.replace(delta=delta)
        cand = log_scale_posterior(eta, prop, gf_new, H, prior)
        if u <= cand - current:
            th, gf, current, accepted[1 + k] = prop, gf_new, cand, True
    return th, gf, accepted


def run_chain(d: LabelledDataset, basis: MeanBasis, prior: PriorSpec, cfg: McmcConfig,
              config_echo: dict | None = None) -> TraceSet:
    cfg.validate()
    if prior.q != basis.size(d.p) or prior.p != d.p:
        raise ValueError("prior dimensions do not match the basis and data")
    rng = np.random.default_rng(cfg.seed)
    X, in_r1 = d.points, d.in_r1
    H = basis_matrix(X, basis)
    eta, th = init_state(d, prior, rng)

    log_steps = np.log(np.maximum(
        np.r_[cfg.mh_step_sigma2, np.full(d.p, cfg.mh_step_delta)], 1e-300))
    zero_steps = np.r_[cfg.mh_step_sigma2, np.full(d.p, cfg.mh_step_delta)] == 0
    n_acc = np.zeros(1 + d.p)
    n_prop = 0
    keep = []
    t = -1
    try:
        gf = gram_factor(X, th.delta, cfg.nugget_scale)
        for t in range(cfg.iterations):
            for _ in range(cfg.gibbs_sweeps_per_iter):
                eta = gibbs_sweep(eta, th, gf, in_r1, H, rng, reverse=cfg.reverse_scan)
                check_signs(eta, in_r1)
            for _ in range(cfg.ess_steps_per_iter):
                eta = elliptical_slice(eta, th, gf, in_r1, H, rng)
            th = th.replace(beta=update_beta(eta, th, gf, H, prior, rng))
            steps = np.where(zero_steps, 0.0, np.exp(log_steps))
            th, gf, acc = mh_update_scale_params(eta, th, gf, prior, H, X, steps, rng,
                                                 cfg.nugget_scale)
            if t < cfg.burnin:
                if cfg.adapt:
                    gain = (t + 1.0) ** -0.6
                    log_steps += gain * (acc - TARGET_ACCEPTANCE)
            else:
                n_acc += acc
                n_prop += 1
                if (t - cfg.burnin) % cfg.thin == 0:
                    keep.append((t, eta.copy(), th.beta.copy(), th.sigma2, th.delta.copy()))
    except NumericalError as exc:
        raise ChainFailure(t, exc) from exc

    rates = {"sigma2": float(n_acc[0] / n_prop)}
    for k in range(d.p):
        rates[f"delta{k + 1}"] = float(n_acc[1 + k] / n_prop)
    echo = {"basis": basis.value, "prior": prior.to_dict(), "mcmc": asdict(cfg)}
    if config_echo:
        echo.update(config_echo)
    echo["final_steps"] = np.exp(log_steps).tolist()
    return TraceSet(
        eta=np.array([k[1] for k in keep]),
        beta=np.array([k[2] for k in keep]),
        sigma2=np.array([k[3] for k in keep]),
        delta=np.array([k[4] for k in keep]),
        iters=np.array([k[0] for k in keep]),
        acceptance_rates=rates,
        config=echo,
    )


def run_chains(d: LabelledDataset, basis: MeanBasis, prior: PriorSpec, cfg: McmcConfig,
               chains: int = 1, config_echo: dict | None = None) -> TraceSet:
    """Independent chains seeded from ``cfg.seed`` via SeedSequence, merged after completion."""
    if chains == 1:
        return run_chain(d, basis, prior, cfg, config_echo)
    seeds = np.random.SeedSequence(cfg.seed).generate_state(chains)
    traces = []
    for s in seeds:
        sub = McmcConfig(**{**asdict(cfg), "seed": int(s)})
        traces.append(run_chain(d, basis, prior, sub, config_echo))
    merged = TraceSet.merge(traces)
    merged.config["mcmc"]["seed"] = cfg.seed
    return merged
