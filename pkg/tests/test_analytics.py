import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sci

from rainstick.analytics import (
    GAMMA,
    LOG2,
    GBlockQuery,
    compute_b,
    dominance_rate,
    dominance_survival,
    escape_prob,
    j_of_t,
    j_star,
    log_escape_prob,
    log_pG,
    mean_bound,
    pk_upper_bound,
    ratio_bound_check,
)
from rainstick.errors import DomainError
from rainstick.quadrature import QuadratureSpec


def _plain_pG(j, k, t, p, n_sites=4000):
    """Direct product over sites, no cutoffs and no closed-form tail."""
    m = np.arange(1, n_sites + 1)
    rate = (1 - p) ** (m - k.__float__())
    wet = np.prod(1 - np.exp(-t * rate[:j]))
    return wet * math.exp(-t * rate[j:].sum())


def test_b_against_scipy():
    ref, _ = sci.quad(lambda y: math.log1p(-(2.0 ** -math.exp(y))), 0, 10.0, epsabs=1e-14, epsrel=1e-13, limit=400)
    assert abs(compute_b(QuadratureSpec(1e-12, 1e-12)) - (LOG2 - ref)) < 1e-11


def test_b_value():
    assert round(compute_b(QuadratureSpec(1e-10, 1e-10)), 4) == 1.1524


def _escape_plain(p):
    rate = (1 - p) / p
    ell = np.arange(1, 300)

    def f(s):
        x = s * np.exp(-ell * math.log1p(-p))
        return rate * math.exp(-rate * s) * float(np.prod(-np.expm1(-x)))

    val, _ = sci.quad(f, 0, math.inf, epsabs=0, epsrel=1e-12, limit=400, points=None)
    return val


@pytest.mark.parametrize("p", [0.2, 0.3, 0.5, 0.7, 0.9])
def test_escape_prob_against_scipy(p):
    assert math.isclose(escape_prob(p), _escape_plain(p), rel_tol=1e-8)


def test_escape_prob_tiny_stays_relative():
    # at p = 0.02 the value is ~1e-25; the log form keeps full relative precision
    lq = log_escape_prob(0.02)
    assert -70 < lq < -40
    assert math.isclose(log_escape_prob(0.02, QuadratureSpec(rel_tol=1e-12)), lq, rel_tol=1e-11)


def test_escape_prob_race_simulation():
    rng = np.random.default_rng(314)
    p, n = 0.5, 200_000
    t1 = rng.exponential(p / (1 - p), n)
    ell = np.arange(1, 60)
    fill = (rng.standard_exponential((n, ell.size)) * (1 - p) ** ell).max(axis=1)
    est = (fill < t1).mean()
    q = escape_prob(p)
    assert abs(est - q) < 3 * math.sqrt(q * (1 - q) / n)


@given(st.floats(min_value=0.03, max_value=0.97))
def test_escape_prob_above_lower_bound(p):
    assert log_escape_prob(p) >= -compute_b() / p


def test_escape_prob_domain():
    for p in (0.0, 1.0, -0.5):
        with pytest.raises(DomainError):
            escape_prob(p)


@pytest.mark.parametrize("j, k, t, p", [(0, 5, 1.0, 0.3), (5, 5, 0.7, 0.3), (30, 20, 3.0, 0.2), (12, 3, 0.01, 0.5), (60, 40, 50.0, 0.1)])
def test_log_pG_against_plain_product(j, k, t, p):
    ref = _plain_pG(j, k, t, p)
    assert math.isclose(log_pG(GBlockQuery(j, k, t, p)), math.log(ref), rel_tol=1e-10, abs_tol=1e-12)


def test_log_pG_configuration_simulation():
    # sites hit by time t independently with rate (1-p)^(m-k)
    rng = np.random.default_rng(2718)
    p, k, t, n = 0.3, 20, 0.7, 100_000
    m = np.arange(1, 121)
    wet = rng.standard_exponential((n, m.size)) / (1 - p) ** (m - k) <= t
    n_wet = wet.sum(axis=1)
    for j in (18, 20, 22):
        est = ((n_wet == j) & wet[:, :j].all(axis=1)).mean()
        ref = math.exp(log_pG(GBlockQuery(j, k, t, p)))
        assert abs(est - ref) < 3.5 * math.sqrt(ref * (1 - ref) / n)


def test_query_validation():
    for args in ((-1, 5, 1.0, 0.3), (2, 0, 1.0, 0.3), (2, 5, 0.0, 0.3), (2, 5, 1.0, 1.0)):
        with pytest.raises(DomainError):
            GBlockQuery(*args)


@pytest.mark.parametrize("p", [0.5, 0.2, 0.05])
@pytest.mark.parametrize("k", [10, 100, 1000])
def test_j_of_log2_is_k(p, k):
    assert j_of_t(LOG2, p, k) == k
    assert j_star(LOG2, p, k) == k


@given(
    st.floats(min_value=0.02, max_value=200.0),
    st.floats(min_value=0.05, max_value=0.9),
    st.integers(1, 60),
)
def test_j_of_t_is_argmax(t, p, k):
    jt = j_of_t(t, p, k)
    top = max(jt + 40, 2 * k + 40)
    vals = [log_pG(GBlockQuery(j, k, t, p)) for j in range(0, top)]
    best = int(np.argmax(vals))
    # equal up to rounding where two neighbours tie
    assert vals[jt] >= vals[best] - 1e-12 * max(1.0, abs(vals[best]))


def test_j_of_t_clamps_at_zero():
    assert j_of_t(1e-9, 0.5, 3) == 0
    assert j_of_t(1e6, 0.5, 3) == 23
    with pytest.raises(DomainError):
        j_star(0.0, 0.5, 3)


@pytest.mark.parametrize("p", [0.5, 0.3, 0.1])
def test_pk_bound_at_one_is_p(p):
    assert math.isclose(pk_upper_bound(1, p), p, rel_tol=1e-10)


@pytest.mark.parametrize("k, p", [(2, 0.3), (7, 0.3), (25, 0.3), (5, 0.5)])
def test_pk_bound_against_scipy(k, p):
    ref, _ = sci.quad(lambda t: _plain_pG(k, k, t, p, 600), 0, math.inf, epsabs=0, epsrel=1e-11, limit=400)
    assert math.isclose(pk_upper_bound(k, p), (1 - p) / p * ref, rel_tol=1e-8)


def test_pk_bound_domain():
    with pytest.raises(DomainError):
        pk_upper_bound(0, 0.3)


def test_ratio_matches_direct_difference():
    k, p, t = 100, 0.05, 10.0
    r = ratio_bound_check(k, p, t, 2)
    jt = j_of_t(t, p, k)
    direct = log_pG(GBlockQuery(k, k, t, p)) - log_pG(GBlockQuery(jt, k, t, p))
    assert math.isclose(r.log_ratio, direct, rel_tol=1e-9)
    assert r.holds == (r.ratio <= r.bound)
    assert math.isclose(r.ell_star, -math.log(t) / math.log1p(-p))
    assert math.isclose(GAMMA, 0.5413, abs_tol=5e-5)


@given(st.floats(min_value=3 * LOG2, max_value=500.0), st.floats(min_value=0.02, max_value=0.3))
def test_ratio_below_one(t, p):
    k = 200
    if j_of_t(t, p, k) <= k:
        return
    assert ratio_bound_check(k, p, t, 2).log_ratio < 0


def test_ratio_domain():
    with pytest.raises(DomainError):
        ratio_bound_check(100, 0.05, 1.0, 2)
    # at p = 0.9 the window from t = 3 log 2 is too short: j(t) = k
    with pytest.raises(DomainError):
        ratio_bound_check(100, 0.9, 3 * LOG2, 2)


def test_dominance_helpers():
    b = compute_b()
    assert math.isclose(dominance_rate(0.5), 0.5 * math.exp(-2 * b))
    sf = dominance_survival(0.5)
    r = dominance_rate(0.5)
    np.testing.assert_allclose(sf(np.array([0, 1, 5])), (1 - r) ** np.array([0, 1, 5]))
    assert math.isclose(mean_bound(0.2), 5 * math.exp(5 * b))
