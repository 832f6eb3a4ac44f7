"""Site-probability laws on the positive integers.

Every law exposes the same small surface used by the samplers:

* ``pmf`` / ``log_pmf`` for sites ``j >= 1``
* ``tail`` / ``log_tail`` for ``P[X > k]``, ``k >= 0``
* ``sample`` (inverse-CDF) and ``sample_above`` (the law conditioned on
  ``X > horizon``)

Log forms are first class; they stay finite long after ``pmf`` underflows.
Sampling maps a uniform ``u`` in ``[0, 1)`` to ``v = 1 - u`` and returns the
smallest ``k`` with ``tail(k) <= v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainError

# largest site index returned by the samplers
SITE_MAX = 2**62

WeightSource = Union[str, float, Callable[[np.random.Generator, int], np.ndarray]]


def _as_sites(j, lowest=1):
    arr = np.asarray(j)
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind != "f" or not np.all(arr == np.floor(arr)):
            raise DomainError(f"site indices must be integers, got {j!r}")
    if np.any(arr < lowest):
        raise DomainError(f"site index must be >= {lowest}, got {j!r}")
    return arr


def _out(values, like):
    if np.ndim(like) == 0:
        return float(values)
    return values


class SiteDistribution:
    """Common sampling logic; subclasses provide ``log_tail`` and ``_invert``."""

    def log_pmf(self, j):
        raise NotImplementedError

    def log_tail(self, k):
        raise NotImplementedError

    def pmf(self, j):
        return _out(np.exp(self.log_pmf(j)), j)

    def log_pmf_range(self, lo: int, hi: int) -> np.ndarray:
        """``log_pmf`` for sites ``lo..hi`` inclusive, without argument checks."""
        return self.log_pmf(np.arange(lo, hi + 1))

    def tail(self, k):
        return _out(np.exp(self.log_tail(k)), k)

    def _invert(self, log_v):
        """Smallest ``k >= 1`` with ``log_tail(k) <= log_v`` (elementwise)."""
        raise NotImplementedError

    def sample(self, rng, size=None):
        u = rng.random(size)
        log_v = np.log1p(-np.asarray(u, dtype=float))
        k = self._invert(log_v)
        if size is None:
            return int(k)
        return np.asarray(k, dtype=np.int64)

    def sample_above(self, horizon: int, rng) -> int:
        """One site drawn from the law conditioned on ``X > horizon``."""
        log_v = math.log1p(-rng.random()) + float(self.log_tail(horizon))
        return max(int(self._invert(log_v)), horizon + 1)


@dataclass(frozen=True)
class GeometricLaw(SiteDistribution):
    """``p_j = p (1 - p)^(j - 1)`` on ``j = 1, 2, ...``."""

    p: float

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise DomainError(f"geometric parameter must lie in (0, 1], got {self.p}")

    @property
    def _log1mp(self) -> float:
        return math.log1p(-self.p) if self.p < 1.0 else -math.inf

    def pmf(self, j):
        j = _as_sites(j)
        if self.p == 1.0:
            return _out(np.where(j == 1, 1.0, 0.0), j)
        return _out(self.p * (1.0 - self.p) ** (j - 1.0), j)

    def log_pmf(self, j):
        j = _as_sites(j)
        if self.p == 1.0:
            return _out(np.where(j == 1, 0.0, -np.inf), j)
        return _out(math.log(self.p) + (j - 1.0) * self._log1mp, j)

    def log_pmf_range(self, lo, hi):
        if self.p == 1.0:
            return self.log_pmf(np.arange(lo, hi + 1))
        return math.log(self.p) + np.arange(lo - 1.0, hi) * self._log1mp

    def tail(self, k):
        k = _as_sites(k, lowest=0)
        return _out((1.0 - self.p) ** np.asarray(k, dtype=float), k)

    def log_tail(self, k):
        k = _as_sites(k, lowest=0)
        if self.p == 1.0:
            return _out(np.where(k == 0, 0.0, -np.inf), k)
        return _out(np.asarray(k, dtype=float) * self._log1mp, k)

    def _invert(self, log_v):
        if self.p == 1.0:
            return np.ones_like(log_v, dtype=np.int64)
        k = np.ceil(np.asarray(log_v) / self._log1mp)
        return np.maximum(k, 1).astype(np.int64)

    def sample_above(self, horizon, rng):
        # memoryless
        return horizon + self.sample(rng)


def geo_pmf(p: float, j: int) -> float:
    """``p (1 - p)^(j - 1)``."""
    return GeometricLaw(p).pmf(j)


def geo_log_pmf(p: float, j: int) -> float:
    return GeometricLaw(p).log_pmf(j)


@dataclass(frozen=True)
class StretchedExpLaw(SiteDistribution):
    """``P[X >= k] = c_alpha * exp(-k^alpha)`` with ``c_alpha = e``."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def c_alpha(self) -> float:
        return math.e

    def log_tail(self, k):
        k = _as_sites(k, lowest=0)
        return _out(1.0 - (k + 1.0) ** self.alpha, k)

    def log_pmf(self, j):
        j = _as_sites(j)
        jf = np.asarray(j, dtype=float)
        ja = jf**self.alpha
        # (j+1)^a - j^a without cancellation
        gap = ja * np.expm1(self.alpha * np.log1p(1.0 / jf))
        return _out(1.0 - ja + np.log(-np.expm1(-gap)), j)

    def _invert(self, log_v):
        a = self.alpha
        s = 1.0 - np.asarray(log_v, dtype=float)
        k = np.ceil(s ** (1.0 / a)) - 1.0
        # one-step correction for rounding in the power
        k = np.where((k + 1.0) ** a < s, k + 1.0, k)
        k = np.where((k > 1.0) & (k**a >= s), k - 1.0, k)
        # beyond any usable cap; keeps the integer cast defined
        return np.clip(k, 1.0, SITE_MAX).astype(np.int64)


def stretched_pmf(alpha: float, k: int) -> float:
    """``e * (exp(-k^alpha) - exp(-(k+1)^alpha))``."""
    return StretchedExpLaw(alpha).pmf(k)


def _uniform_weights(rng, n):
    w = rng.random(n)
    w[w == 0.0] = np.nextafter(0.0, 1.0)
    return w


@dataclass(eq=False)
class SieveRealization(SiteDistribution):
    """Stick-breaking site probabilities ``p_j = (1-W_1)...(1-W_{j-1}) W_j``.

    Weights are drawn on demand from ``weight_fn(rng, n)`` and cached, so
    one realization is a fixed (random) law once a site has been touched.
    A constant weight is kept symbolically and follows the geometric
    formulas exactly.
    """

    weight_fn: Callable[[np.random.Generator, int], np.ndarray] | None
    rng: np.random.Generator | None = None
    constant: float | None = None
    _w: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    _log_rem: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    @property
    def horizon(self) -> int:
        return len(self._w)

    @property
    def weights(self) -> np.ndarray:
        return self._w.copy()

    def extend_to(self, n: int) -> None:
        if n <= self.horizon:
            return
        need = max(n - self.horizon, self.horizon, 16)
        if self.constant is not None:
            new = np.full(need, self.constant)
        else:
            new = np.asarray(self.weight_fn(self.rng, need), dtype=float)
            trusted = self.weight_fn is _uniform_weights
            if not trusted and (new.shape != (need,) or not np.all((new > 0.0) & (new < 1.0))):
                raise DomainError("sieve weights must lie strictly inside (0, 1)")
        start = self._log_rem[-1] if self.horizon else 0.0
        self._log_rem = np.concatenate([self._log_rem, start + np.cumsum(np.log1p(-new))])
        self._w = np.concatenate([self._w, new])

    def log_tail(self, k):
        k = _as_sites(k, lowest=0)
        if self.constant is not None:
            return _out(np.asarray(k, dtype=float) * math.log1p(-self.constant), k)
        self.extend_to(int(np.max(k)))
        padded = np.concatenate([[0.0], self._log_rem])
        return _out(padded[k], k)

    def log_pmf(self, j):
        j = _as_sites(j)
        if self.constant is not None:
            return _out(math.log(self.constant) + (j - 1.0) * math.log1p(-self.constant), j)
        self.extend_to(int(np.max(j)))
        return _out(np.log(self._w[j - 1]) + self.log_tail(j - 1), j)

    def log_pmf_range(self, lo, hi):
        if self.constant is not None:
            return self.log_pmf(np.arange(lo, hi + 1))
        self.extend_to(hi)
        prev = self._log_rem[lo - 2 : hi - 1] if lo > 1 else np.concatenate([[0.0], self._log_rem[: hi - 1]])
        return np.log(self._w[lo - 1 : hi]) + prev

    def pmf(self, j):
        j = _as_sites(j)
        if self.constant is not None:
            w = self.constant
            return _out(w * (1.0 - w) ** (j - 1.0), j)
        self.extend_to(int(np.max(j)))
        return _out(self._w[j - 1] * np.exp(self.log_tail(j - 1)), j)

    def remaining_mass(self, n: int) -> float:
        """``prod_{i <= n} (1 - W_i)``: mass not yet assigned to sites ``1..n``."""
        return float(np.exp(self.log_tail(n)))

    def _invert(self, log_v):
        log_v = np.asarray(log_v, dtype=float)
        if self.constant is not None:
            k = np.ceil(log_v / math.log1p(-self.constant))
            return np.maximum(k, 1).astype(np.int64)
        target = float(np.min(log_v))
        while self.horizon == 0 or self._log_rem[-1] > target:
            self.extend_to(2 * self.horizon + 1)
        idx = np.searchsorted(-self._log_rem, -log_v, side="left")
        return (idx + 1).astype(np.int64)


def sieve_realize(weight_source: WeightSource, horizon: int, rng) -> SieveRealization:
    """Realize stick-breaking weights for sites ``1..horizon`` (extensible).

    ``weight_source`` is ``"uniform"``, a constant in ``(0, 1)``, or a
    callable ``fn(rng, n)`` returning ``n`` weights.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if isinstance(weight_source, str):
        if weight_source != "uniform":
            raise DomainError(f"unknown weight source {weight_source!r}")
        real = SieveRealization(_uniform_weights, rng)
    elif callable(weight_source):
        real = SieveRealization(weight_source, rng)
    else:
        w = float(weight_source)
        if not (0.0 < w < 1.0):
            raise DomainError(f"constant sieve weight must lie in (0, 1), got {w}")
        real = SieveRealization(None, rng, constant=w)
    real.extend_to(horizon)
    return real


def sample_site(dist: SiteDistribution, rng) -> int:
    """One draw from ``dist`` by inverse-CDF."""
    return dist.sample(rng)
