"""Deterministic numerics for the geometric rainstick.

Time conventions follow the samplers: in ``log_pG`` and friends the clock is
scaled so that site ``m`` is hit at rate ``(1-p)^(m-k)`` (unit rate at the
reference site ``k``).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .quadrature import QuadratureSpec, integrate, integrate_log

LOG2 = math.log(2.0)
# exp(-40) ~ 4e-18: factors 1 - exp(-x) with x above this are taken as 1
WET_CUTOFF = 40.0

DEFAULT_SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11)


def _check_p(p, allow_one=False):
    ok = 0.0 < p < 1.0 or (allow_one and p == 1.0)
    if not ok:
        raise DomainError(f"p must lie in (0, 1), got {p}")


def _log1mexp(x):
    """``log(1 - exp(-x))`` for ``x > 0``."""
    return np.log(-np.expm1(-np.asarray(x, dtype=float)))


def _b_integrand(y):
    return _log1mexp(LOG2 * np.exp(y))


@functools.lru_cache(maxsize=None)
def compute_b(spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``log 2 - int_0^inf log(1 - 2^(-e^y)) dy``.

    The integrand is ``-2^(-e^y)`` to leading order for large ``y``, so the
    range is cut where that drops below ``abs_tol * 1e-3``.
    """
    cut = math.log(-math.log(spec.abs_tol * 1e-3) / LOG2)
    val, _ = integrate(_b_integrand, 0.0, cut, spec)
    return LOG2 - val


def _log_wet_product(s, ratio, start=1):
    """``sum_{l >= start} log(1 - exp(-s * ratio^l))`` for ``ratio > 1``, per ``s``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    log_r = math.log(ratio)
    # number of factors still below the cutoff
    top = np.floor(np.log(WET_CUTOFF / s) / log_r)
    n_terms = int(max(np.max(top) - start + 1, 0))
    if n_terms == 0:
        return np.zeros_like(s)
    ell = np.arange(start, start + n_terms)
    x = s[:, None] * np.exp(ell[None, :] * log_r)
    terms = np.where(x <= WET_CUTOFF, _log1mexp(np.minimum(x, WET_CUTOFF)), 0.0)
    return terms.sum(axis=1)


def log_escape_prob(p: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Log of the forgetful-process fill probability (see ``escape_prob``)."""
    _check_p(p)
    rate = (1.0 - p) / p
    ratio = 1.0 / (1.0 - p)

    def log_f(u):
        u = np.asarray(u, dtype=float)
        s = np.exp(u)
        return math.log(rate) - rate * s + _log_wet_product(s, ratio) + u

    centre = math.log(p)
    val, _ = integrate_log(log_f, centre - 4.0, centre + 4.0, spec)
    return val


@functools.lru_cache(maxsize=256)
def escape_prob(p: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Probability that every dry site behind the maximum fills first.

    Integrates over the exponential time ``s`` (rate ``(1-p)/p``) at which
    the maximum next moves, against the probability that all sites at
    distance ``l >= 1`` behind it, hit at rates ``(1-p)^(-l)``, are wet by
    then. Bounded below by ``exp(-b/p)``.
    """
    return math.exp(log_escape_prob(p, spec))


@dataclass(frozen=True)
class GBlockQuery:
    """Event that at time ``t`` exactly the sites ``1..j`` are wet."""

    j: int
    k: int
    t: float
    p: float

    def __post_init__(self):
        if self.j < 0 or self.k < 1:
            raise DomainError(f"need j >= 0 and k >= 1, got j={self.j}, k={self.k}")
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t}")
        _check_p(self.p)


def _log_pG(j, k, t, p):
    """Vectorized over ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    l1p = math.log1p(-p)
    dry = -t * np.exp((j + 1 - k) * l1p) / p
    if j == 0:
        return dry
    # wet factors with t (1-p)^(m-k) > cutoff are dropped
    m0 = np.maximum(np.ceil(k + np.log(WET_CUTOFF / t) / l1p), 1)
    lo = int(np.min(m0))
    if lo > j:
        return dry
    m = np.arange(lo, j + 1)
    x = t[:, None] * np.exp((m[None, :] - k) * l1p)
    wet = np.where(m[None, :] >= m0[:, None], _log1mexp(np.maximum(x, 1e-300)), 0.0)
    return wet.sum(axis=1) + dry


def log_pG(q: GBlockQuery) -> float:
    """``log P[G_{j,t}]`` from the independent per-site wet probabilities."""
    return float(_log_pG(q.j, q.k, q.t, q.p)[0])


def j_star(t: float, p: float, k: int) -> float:
    """Real ``j`` with ``t (1-p)^(j-k) = log 2``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    _check_p(p)
    return k + math.log(LOG2 / t) / math.log1p(-p)


def j_of_t(t: float, p: float, k: int) -> int:
    """Integer ``j >= 0`` maximizing ``P[G_{j,t}]``."""
    return max(0, math.floor(j_star(t, p, k)))


def pk_upper_bound(k: int, p: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``(1-p)/p * int_0^inf P[G_{k,t}] dt``, an upper bound on ``P[K = k]``."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    _check_p(p)

    def log_f(u):
        u = np.asarray(u, dtype=float)
        return _log_pG(k, k, np.exp(u), p) + u

    val, _ = integrate_log(log_f, -4.0, 4.0, spec)
    return (1.0 - p) / p * math.exp(val)


class RatioCheck(NamedTuple):
    ratio: float
    bound: float
    holds: bool
    log_ratio: float
    ell_star: float
    gamma: float


GAMMA = -math.log(math.exp(-1.0) / (1.0 - math.exp(-1.0)))


def ratio_bound_check(k: int, p: float, t: float, n: float) -> RatioCheck:
    """Compare ``P[G_{k,t}] / P[G_{j(t),t}]`` with ``t^(-n)``.

    The ratio is the product over ``l = 1..j(t)-k`` of
    ``exp(-x_l) / (1 - exp(-x_l))`` with ``x_l = t (1-p)^l``.
    ``ell_star`` solves ``t (1-p)^l = 1``.
    """
    _check_p(p)
    if t < 3.0 * LOG2:
        raise DomainError(f"t must be >= 3 log 2, got {t}")
    jt = j_of_t(t, p, k)
    if jt <= k:
        raise DomainError(f"need j(t) > k, got j(t)={jt}, k={k}")
    ell = np.arange(1, jt - k + 1)
    x = t * np.exp(ell * math.log1p(-p))
    log_ratio = float(np.sum(-x - _log1mexp(x)))
    bound = t ** (-n)
    ell_star = -math.log(t) / math.log1p(-p)
    return RatioCheck(math.exp(log_ratio), bound, log_ratio <= -n * math.log(t), log_ratio, ell_star, GAMMA)


def dominance_rate(p: float) -> float:
    """``p exp(-b/p)``: parameter of the geometric law dominating ``K``."""
    _check_p(p)
    return p * math.exp(-compute_b() / p)


def dominance_survival(p: float):
    """Survival function ``x -> (1 - p e^(-b/p))^x`` of the dominating law."""
    rate = dominance_rate(p)
    log_keep = math.log1p(-rate)

    def sf(x):
        return np.exp(np.asarray(x, dtype=float) * log_keep)

    return sf


def mean_bound(p: float) -> float:
    """``(1/p) e^(b/p)``."""
    _check_p(p)
    return math.exp(compute_b() / p) / p
