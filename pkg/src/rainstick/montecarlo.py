"""Reproducible replication harness, estimators and distributional tests.

Replicate ``i`` of a run draws from its own generator, seeded by
``SeedSequence(master_seed, spawn_key=(i,))``, so results depend only on the
run configuration and never on how replicates are split across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from .analytics import escape_prob
from .blocks import DROP_CAP, SITE_CAP, sample_block_clocks, sample_block_discrete, sample_forgetful
from .distributions import GeometricLaw, StretchedExpLaw, sieve_realize
from .errors import ConfigError, DomainError
from .paintstick import sample_paintstick

WORKERS_ENV = "RAINSTICK_WORKERS"

_CAP_CODES = {None: 0, SITE_CAP: 1, DROP_CAP: 2, "step": 3}
CAP_NAMES = {v: k for k, v in _CAP_CODES.items()}

QUANTILE_LEVELS = (1, 5, 25, 50, 75, 95, 99)
ECDF_LIMIT = 10**6


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class RunConfig:
    master_seed: int
    reps: int
    workers: int = 1
    site_cap: int = 10**8
    drop_cap: int = 2**62
    step_cap: int = 10**8
    rel_tol: float = 1e-11

    def __post_init__(self):
        if not (0 <= self.master_seed < 2**64):
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.reps < 0 or self.workers < 1:
            raise ConfigError("reps must be >= 0 and workers >= 1")
        if min(self.site_cap, self.drop_cap, self.step_cap) < 1:
            raise ConfigError("caps must be >= 1")


@dataclass(frozen=True)
class Experiment:
    name: str
    params: dict = field(default_factory=dict)


def replicate_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(index,))))


def _make_law(params, rng):
    kind = params.get("dist", "geo")
    if kind == "geo":
        return GeometricLaw(float(params["p"]))
    if kind == "stretched":
        return StretchedExpLaw(float(params["alpha"]))
    if kind == "sieve":
        return sieve_realize(params.get("weights", "uniform"), 16, rng)
    raise ConfigError(f"unknown distribution {kind!r}")


def _exp_block(params, config, rng):
    o = sample_block_clocks(_make_law(params, rng), config.site_cap, rng)
    return o.k, o.log_eta, -1, _CAP_CODES[o.capped]


def _exp_discrete(params, config, rng):
    o = sample_block_discrete(_make_law(params, rng), config.drop_cap, rng, params.get("method", "jump"))
    return o.k, math.nan, o.n_drops, _CAP_CODES[o.capped]


def _exp_forgetful(params, config, rng):
    p = float(params["p"])
    return sample_forgetful(p, escape_prob(p), rng), math.nan, -1, 0


def _exp_paintstick(params, config, rng):
    o = sample_paintstick(float(params["p"]), config.step_cap, rng)
    return o.k_prime, math.nan, -1, _CAP_CODES["step"] if o.capped else 0


def _exp_stretched(params, config, rng):
    return _exp_block({"dist": "stretched", "alpha": params["alpha"]}, config, rng)


def _exp_sieve(params, config, rng):
    return _exp_block({"dist": "sieve", "weights": params.get("weights", "uniform")}, config, rng)


EXPERIMENTS: dict[str, Callable] = {
    "block": _exp_block,
    "block-discrete": _exp_discrete,
    "forgetful": _exp_forgetful,
    "paintstick": _exp_paintstick,
    "stretched": _exp_stretched,
    "sieve": _exp_sieve,
}

_REQUIRED = {
    "forgetful": ("p",),
    "paintstick": ("p",),
    "stretched": ("alpha",),
}


def _validate(experiment: Experiment):
    if experiment.name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment.name!r}")
    params = experiment.params
    for key in _REQUIRED.get(experiment.name, ()):
        if key not in params:
            raise ConfigError(f"experiment {experiment.name!r} needs parameter {key!r}")
    if experiment.name in ("block", "block-discrete"):
        kind = params.get("dist", "geo")
        need = {"geo": "p", "stretched": "alpha", "sieve": None}.get(kind, "?")
        if need == "?":
            raise ConfigError(f"unknown distribution {kind!r}")
        if need and need not in params:
            raise ConfigError(f"distribution {kind!r} needs parameter {need!r}")
    # surface domain errors before any worker starts
    probe = np.random.default_rng(0)
    if experiment.name in ("forgetful", "paintstick") and not (0.0 < float(params["p"]) < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {params['p']}")
    if experiment.name in ("block", "block-discrete"):
        _make_law(params, probe)
    if experiment.name == "stretched":
        StretchedExpLaw(float(params["alpha"]))


@dataclass
class SampleSet:
    """Per-replicate results in replicate order.

    ``n`` is -1 and ``log_eta`` NaN where the sampler does not produce them;
    ``capped`` holds 0 for complete replicates and a cap code otherwise.
    """

    k: np.ndarray
    log_eta: np.ndarray
    n: np.ndarray
    capped: np.ndarray

    def __len__(self):
        return len(self.k)

    @property
    def complete(self) -> np.ndarray:
        return self.capped == 0

    def records(self):
        for i in range(len(self)):
            le = float(self.log_eta[i])
            n = int(self.n[i])
            yield {
                "rep": i,
                "k": int(self.k[i]),
                "log_eta": le if math.isfinite(le) else None,
                "n": n if n >= 0 else None,
                "capped": CAP_NAMES[int(self.capped[i])],
            }

    @classmethod
    def concat(cls, parts):
        if not parts:
            return cls(np.empty(0, np.int64), np.empty(0), np.empty(0, np.int64), np.empty(0, np.uint8))
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in ("k", "log_eta", "n", "capped")))


def _run_range(experiment: Experiment, config: RunConfig, start: int, stop: int) -> SampleSet:
    fn = EXPERIMENTS[experiment.name]
    size = stop - start
    k = np.empty(size, np.int64)
    log_eta = np.empty(size)
    n = np.empty(size, np.int64)
    capped = np.empty(size, np.uint8)
    for i in range(size):
        k[i], log_eta[i], n[i], capped[i] = fn(experiment.params, config, replicate_rng(config.master_seed, start + i))
    return SampleSet(k, log_eta, n, capped)


def run_replicated(experiment: Experiment, config: RunConfig) -> SampleSet:
    """Run ``config.reps`` replicates of ``experiment``; output order is replicate order."""
    _validate(experiment)
    if config.reps == 0:
        return SampleSet.concat([])
    if config.workers == 1 or config.reps < 2 * config.workers:
        return _run_range(experiment, config, 0, config.reps)
    n_chunks = 4 * config.workers
    edges = np.linspace(0, config.reps, n_chunks + 1).astype(int)
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = [
            pool.submit(_run_range, experiment, config, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a
        ]
        parts = [f.result() for f in futures]
    return SampleSet.concat(parts)


@dataclass
class Summary:
    n: int
    mean: float
    variance: float
    ci95: float
    quantiles: dict
    median: float
    trimmed_mean: float
    capped_fraction: float
    ecdf: np.ndarray = field(repr=False)
    bootstrap_ci95: tuple | None = None

    def to_dict(self, with_ecdf: bool = False) -> dict:
        out = {
            "n": self.n,
            "mean": self.mean,
            "variance": self.variance,
            "ci95": self.ci95,
            "quantiles": self.quantiles,
            "median": self.median,
            "trimmed_mean": self.trimmed_mean,
            "capped_fraction": self.capped_fraction,
        }
        if self.bootstrap_ci95 is not None:
            out["bootstrap_ci95"] = list(self.bootstrap_ci95)
        if with_ecdf:
            out["ecdf"] = self.ecdf.tolist()
        return out


def _compress(sorted_values, limit=ECDF_LIMIT):
    if sorted_values.size <= limit:
        return sorted_values
    # evenly spaced order statistics keep the step function within 1/limit
    idx = np.linspace(0, sorted_values.size - 1, limit).round().astype(np.int64)
    return sorted_values[idx]


def summarize(samples, capped=None, bootstrap: int = 0, seed: int = 0) -> Summary:
    """Moments, normal-approximation 95% CI, quantiles and ECDF of ``samples``.

    Replicates flagged in ``capped`` are excluded from the statistics and
    reported through ``capped_fraction``. The normal CI understates the
    uncertainty for heavy-tailed samples; ``bootstrap > 0`` adds a
    percentile bootstrap interval for the mean.
    """
    x = np.asarray(samples, dtype=float)
    total = x.size
    if capped is not None:
        mask = np.asarray(capped) != 0
        x = x[~mask]
        capped_fraction = float(mask.mean()) if total else math.nan
    else:
        capped_fraction = 0.0
    if x.size == 0:
        raise DomainError("summarize needs at least one uncapped sample")
    n = x.size
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1)) if n > 1 else 0.0
    ci = 1.959963984540054 * math.sqrt(var / n) if n > 1 else math.inf
    qs = np.percentile(x, QUANTILE_LEVELS)
    boot = None
    if bootstrap > 0:
        rng = np.random.default_rng(seed)
        means = np.array([rng.choice(x, n).mean() for _ in range(bootstrap)])
        boot = tuple(float(v) for v in np.percentile(means, [2.5, 97.5]))
    return Summary(
        n=n,
        mean=mean,
        variance=var,
        ci95=ci,
        quantiles={str(level): float(q) for level, q in zip(QUANTILE_LEVELS, qs)},
        median=float(np.median(x)),
        trimmed_mean=float(stats.trim_mean(x, 0.1)),
        capped_fraction=capped_fraction,
        ecdf=_compress(np.sort(x)),
        bootstrap_ci95=boot,
    )


def ecdf(sorted_values: np.ndarray, x) -> np.ndarray:
    """Right-continuous empirical CDF ``P[X <= x]`` from sorted samples."""
    return np.searchsorted(sorted_values, x, side="right") / sorted_values.size


class DominanceResult(NamedTuple):
    holds: bool
    worst_x: int
    worst_gap: float


def dominance_check(samples, dominating_sf: Callable, slack_sigmas: float = 3.0) -> DominanceResult:
    """Check ``P[S > x] <= sf(x) + slack * SE(x)`` at every integer ``x``.

    ``SE(x)`` is the larger of the binomial standard errors at ``sf(x)`` and
    at the empirical survival. The null value alone is far too small in the
    tail, where a single large sample would count as a violation. The
    empirical survival is constant between sample values while ``sf``
    decreases, so only ``x`` in ``{v - 1, v}`` for sample values ``v`` need
    checking. ``worst_gap`` is the largest excess; it is positive iff the
    check fails.
    """
    s = np.sort(np.asarray(samples, dtype=np.int64))
    if s.size == 0:
        raise DomainError("dominance_check needs samples")
    vals = np.unique(s)
    xs = np.unique(np.concatenate([vals - 1, vals]))
    emp = 1.0 - np.searchsorted(s, xs, side="right") / s.size
    sf = np.asarray(dominating_sf(xs), dtype=float)
    var = np.maximum(np.clip(sf * (1.0 - sf), 0.0, None), emp * (1.0 - emp))
    se = np.sqrt(var / s.size)
    gap = emp - sf - slack_sigmas * se
    i = int(np.argmax(gap))
    return DominanceResult(bool(gap[i] <= 0.0), int(xs[i]), float(gap[i]))


def law_equality_test(samples_a, samples_b, support_cut: int) -> float:
    """Two-sample chi-square p-value over bins ``1..support_cut`` and an overflow bin."""
    a = np.asarray(samples_a, dtype=np.int64)
    b = np.asarray(samples_b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise DomainError("law_equality_test needs two non-empty samples")
    if support_cut < 1 or min(a.min(), b.min()) < 1:
        raise DomainError("samples must be positive integers and support_cut >= 1")
    rows = [np.bincount(np.minimum(v, support_cut + 1), minlength=support_cut + 2)[1:] for v in (a, b)]
    table = np.vstack(rows)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        raise DomainError("degenerate support: all samples fall in one bin")
    return float(stats.chi2_contingency(table, correction=False)[1])
