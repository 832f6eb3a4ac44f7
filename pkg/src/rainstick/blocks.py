"""First-block samplers for p-biased permutations.

Three routes to the block size ``K``:

``first_block_from_stream``
    reads an explicit drop sequence.
``sample_block_clocks``
    Poissonized: site ``j`` first gets wet at ``T_j = E_j / p_j``; ``K`` is
    the least ``k`` with ``max_{j<=k} T_j < min_{j>k} T_j``. All clocks are
    kept as logs.
``sample_block_discrete``
    the drop-by-drop process, giving the exact drop count ``N`` as well.

``sample_forgetful`` draws the terminal maximum of the forgetful process,
which dominates ``K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .distributions import SiteDistribution, StretchedExpLaw
from .errors import DomainError

SITE_CAP = "site"
DROP_CAP = "drop"


@dataclass(frozen=True)
class BlockOutcome:
    """One replicate.

    For a capped outcome ``k`` is the cap and the true block size is known
    only to exceed it; ``log_eta`` is then the largest realized log clock,
    a lower bound on the completion time.
    """

    k: int
    log_eta: float
    n_drops: int | None = None
    capped: str | None = None

    def as_record(self) -> dict:
        return {"k": self.k, "log_eta": self.log_eta, "n": self.n_drops, "capped": self.capped}


class StreamBlock(NamedTuple):
    k: int | None
    n: int
    prefix: tuple
    complete: bool


class BlockTracker:
    """Incremental first-block detection over a drop stream.

    The block is complete as soon as the largest site seen equals the number
    of distinct sites seen.
    """

    def __init__(self):
        self.seen = set()
        self.prefix = []
        self.max_seen = 0
        self.n = 0

    def feed(self, x: int) -> bool:
        self.n += 1
        if x not in self.seen:
            self.seen.add(x)
            self.prefix.append(x)
            if x > self.max_seen:
                self.max_seen = x
        return self.max_seen == len(self.seen)

    def result(self, complete: bool) -> StreamBlock:
        return StreamBlock(self.max_seen if complete else None, self.n, tuple(self.prefix), complete)


def first_block_from_stream(xs: Iterable[int]) -> StreamBlock:
    """Block size, drop count and permutation prefix read off ``xs``.

    >>> first_block_from_stream([3, 1, 4, 1, 3, 1, 2])
    StreamBlock(k=4, n=7, prefix=(3, 1, 4, 2), complete=True)

    If ``xs`` runs out first the result has ``complete=False`` and carries the
    partial prefix.
    """
    tracker = BlockTracker()
    empty = True
    for x in xs:
        empty = False
        x = int(x)
        if x < 1:
            raise DomainError(f"sites are positive integers, got {x}")
        if tracker.feed(x):
            return tracker.result(True)
    if empty:
        raise DomainError("empty drop stream")
    return tracker.result(False)


def _scan_segment(seg, log_max_before, log_tail_min):
    """Offset of the first block endpoint inside ``seg``, or -1."""
    pm = np.maximum(np.maximum.accumulate(seg), log_max_before)
    after = np.empty_like(seg)
    after[:-1] = np.minimum.accumulate(seg[:0:-1])[::-1]
    after[-1] = np.inf
    np.minimum(after, log_tail_min, out=after)
    # equal clocks: lower site index counts as earlier
    hit = np.flatnonzero(pm <= after)
    if hit.size == 0:
        return -1, pm
    return int(hit[0]), pm


@dataclass
class ClockState:
    """Log first-arrival clocks for sites ``1..horizon`` plus the tail.

    ``log_tail_min`` is the log of the minimum clock over all unrealized
    sites; it is exponential with rate ``tail(horizon)``.
    """

    dist: SiteDistribution
    rng: np.random.Generator
    horizon: int = 0
    segments: list = field(default_factory=list)
    log_max: float = -math.inf
    log_tail_min: float = math.inf

    @property
    def log_clock(self) -> np.ndarray:
        if not self.segments:
            return np.empty(0)
        return np.concatenate(self.segments)

    def prefix_log_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.log_clock)

    def _fresh(self, lo, hi):
        return np.log(self.rng.standard_exponential(hi - lo + 1)) - self.dist.log_pmf_range(lo, hi)

    def _draw_tail(self, horizon):
        return math.log(self.rng.standard_exponential()) - float(self.dist.log_tail(horizon))

    def start(self, horizon: int) -> np.ndarray:
        seg = self._fresh(1, horizon)
        self.segments.append(seg)
        self.horizon = horizon
        self.log_tail_min = self._draw_tail(horizon)
        return seg

    def split_tail(self, site_cap: int):
        """Realize sites past the horizon given the current tail minimum.

        The argmin of the tail is placed proportionally to ``p_j``; every
        other new clock is the tail minimum plus a fresh exponential.
        Returns the new segment, or ``None`` when the argmin lies past
        ``site_cap``.
        """
        tau = self.log_tail_min
        loc = self.dist.sample_above(self.horizon, self.rng)
        if loc > site_cap:
            return None
        new_h = min(max(2 * self.horizon, loc), site_cap)
        seg = np.logaddexp(tau, self._fresh(self.horizon + 1, new_h))
        seg[loc - self.horizon - 1] = tau
        self.log_max = max(self.log_max, float(np.max(self.segments[-1])))
        self.segments.append(seg)
        self.horizon = new_h
        self.log_tail_min = float(np.logaddexp(tau, self._draw_tail(new_h)))
        return seg


def run_clocks(dist: SiteDistribution, site_cap: int, rng, initial_horizon: int = 32):
    """Clock sampler returning ``(BlockOutcome, ClockState)``."""
    if site_cap < 1:
        raise DomainError(f"site_cap must be >= 1, got {site_cap}")
    state = ClockState(dist, rng)
    seg = state.start(min(initial_horizon, site_cap))
    first_site = 1
    while True:
        off, pm = _scan_segment(seg, state.log_max, state.log_tail_min)
        if off >= 0:
            return BlockOutcome(first_site + off, float(pm[off])), state
        if state.horizon >= site_cap:
            return BlockOutcome(site_cap, float(pm[-1]), capped=SITE_CAP), state
        first_site = state.horizon + 1
        seg = state.split_tail(site_cap)
        if seg is None:
            return BlockOutcome(site_cap, float(pm[-1]), capped=SITE_CAP), state


def sample_block_clocks(dist: SiteDistribution, site_cap: int, rng, initial_horizon: int = 32) -> BlockOutcome:
    """First block via exponential clocks; exact, with capped outcomes past ``site_cap``."""
    return run_clocks(dist, site_cap, rng, initial_horizon)[0]


def sample_stretched_block(alpha: float, site_cap: int, rng, initial_horizon: int = 32) -> BlockOutcome:
    return sample_block_clocks(StretchedExpLaw(alpha), site_cap, rng, initial_horizon)


def _drops_literal(dist, drop_cap, rng):
    tracker = BlockTracker()
    chunk = 16
    while True:
        take = min(chunk, drop_cap - tracker.n)
        if take <= 0:
            return BlockOutcome(tracker.max_seen, math.nan, tracker.n, capped=DROP_CAP)
        for x in np.atleast_1d(dist.sample(rng, take)).tolist():
            if tracker.feed(x):
                return BlockOutcome(tracker.max_seen, math.nan, tracker.n)
        chunk = min(2 * chunk, 1 << 16)


def _drops_jump(dist, drop_cap, rng):
    # Skip drops on wet sites: the wait for a dry hit is geometric in the dry
    # mass, and the hit site is proportional to p_j over dry sites. Masses
    # are kept as logs; at small p they fall far below the smallest double.
    m = int(dist.sample(rng))
    n = 1
    dry = np.arange(1, m)
    dry_lp = np.atleast_1d(dist.log_pmf(dry)) if dry.size else np.empty(0)
    log_cap = math.log(drop_cap)
    while dry.size:
        log_tail = float(dist.log_tail(m))
        top = max(float(dry_lp.max()), log_tail)
        rel = np.exp(dry_lp - top)
        rel_tail = math.exp(log_tail - top)
        log_dry = top + math.log(rel.sum() + rel_tail)
        if log_dry > -30.0:
            wait = math.ceil(math.log1p(-rng.random()) / math.log1p(-min(math.exp(log_dry), 1.0))) if log_dry < 0.0 else 1
        else:
            # geometric with tiny success probability: exponential scaling
            log_wait = math.log(rng.standard_exponential()) - log_dry
            wait = math.ceil(math.exp(log_wait)) if log_wait < log_cap + 1.0 else drop_cap + 1
        n += max(wait, 1)
        if n > drop_cap:
            return BlockOutcome(m, math.nan, drop_cap, capped=DROP_CAP)
        u = rng.random() * (rel.sum() + rel_tail)
        if u < rel_tail:
            loc = dist.sample_above(m, rng)
            if loc > m + 1:
                gap = np.arange(m + 1, loc)
                dry = np.concatenate([dry, gap])
                dry_lp = np.concatenate([dry_lp, np.atleast_1d(dist.log_pmf(gap))])
            m = loc
        else:
            i = int(np.searchsorted(np.cumsum(rel), u - rel_tail, side="right"))
            i = min(i, dry.size - 1)
            dry = np.delete(dry, i)
            dry_lp = np.delete(dry_lp, i)
    return BlockOutcome(m, math.nan, n)


def sample_block_discrete(dist: SiteDistribution, drop_cap: int, rng, method: str = "jump") -> BlockOutcome:
    """First block of the discrete rainstick, with the exact drop count.

    ``method="drops"`` draws every drop through ``dist.sample``;
    ``method="jump"`` skips the drops that land on wet sites, which keeps
    the cost proportional to ``K`` while ``N`` grows without bound.
    ``log_eta`` is NaN here: there is no continuous clock.
    """
    if drop_cap < 1:
        raise DomainError(f"drop_cap must be >= 1, got {drop_cap}")
    if method == "drops":
        return _drops_literal(dist, drop_cap, rng)
    if method == "jump":
        return _drops_jump(dist, drop_cap, rng)
    raise DomainError(f"unknown discrete method {method!r}")


def sample_forgetful(p: float, escape_q: float, rng) -> int:
    """Terminal maximum of the forgetful process.

    ``G ~ Geo(escape_q)`` fill attempts, each preceded by a ``Geo(p)`` jump of
    the maximum; the sum of ``G`` geometric jumps is ``G`` plus a negative
    binomial number of failures.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if not (0.0 < escape_q <= 1.0):
        raise DomainError(f"escape_q must lie in (0, 1], got {escape_q}")
    attempts = int(rng.geometric(escape_q))
    return attempts + int(rng.negative_binomial(attempts, p))

