import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainstick.blocks import (
    DROP_CAP,
    SITE_CAP,
    first_block_from_stream,
    run_clocks,
    sample_block_clocks,
    sample_block_discrete,
    sample_forgetful,
    sample_stretched_block,
)
from rainstick.distributions import GeometricLaw, StretchedExpLaw, sieve_realize
from rainstick.errors import DomainError
from rainstick.montecarlo import law_equality_test


def _brute_block(xs):
    for n in range(1, len(xs) + 1):
        seen = set(xs[:n])
        if seen == set(range(1, max(seen) + 1)):
            return max(seen), n
    return None


def test_worked_stream():
    res = first_block_from_stream((3, 1, 4, 1, 3, 1, 2))
    assert (res.k, res.n, res.prefix, res.complete) == (4, 7, (3, 1, 4, 2), True)


def test_stream_stops_at_completion():
    res = first_block_from_stream(iter([1, 5, 5]))
    assert (res.k, res.n) == (1, 1)


def test_incomplete_stream():
    res = first_block_from_stream([2, 3, 2])
    assert not res.complete and res.k is None and res.prefix == (2, 3)


def test_stream_errors():
    with pytest.raises(DomainError):
        first_block_from_stream([])
    with pytest.raises(DomainError):
        first_block_from_stream([0, 1])


@given(st.lists(st.integers(1, 8), min_size=1, max_size=40))
def test_stream_matches_brute_force(xs):
    res = first_block_from_stream(xs)
    brute = _brute_block(xs)
    if brute is None:
        assert not res.complete
    else:
        assert (res.k, res.n) == brute
        assert sorted(res.prefix) == list(range(1, res.k + 1))


def test_literal_drops_with_stub(uniform_stub):
    # for Geo(1/2), u = 1 - 1.5 * 2^-j inverts to site j
    sites = [3, 1, 4, 1, 3, 1, 2]
    stub = uniform_stub([1 - 1.5 * 2.0**-j for j in sites] + [0.0] * 64)
    out = sample_block_discrete(GeometricLaw(0.5), 10**6, stub, method="drops")
    assert (out.k, out.n_drops, out.capped) == (4, 7, None)
    assert math.isnan(out.log_eta)


def test_drop_cap(uniform_stub):
    stub = uniform_stub([1 - 1.5 * 2.0**-3] * 100)
    out = sample_block_discrete(GeometricLaw(0.5), 5, stub, method="drops")
    assert out.capped == DROP_CAP and out.n_drops == 5 and out.k == 3


def test_discrete_errors(rng):
    with pytest.raises(DomainError):
        sample_block_discrete(GeometricLaw(0.5), 0, rng)
    with pytest.raises(DomainError):
        sample_block_discrete(GeometricLaw(0.5), 10, rng, method="teleport")


def test_jump_chain_matches_literal_drops():
    law = GeometricLaw(0.5)
    g1, g2 = np.random.default_rng(1), np.random.default_rng(2)
    lit = [sample_block_discrete(law, 2**62, g1, "drops") for _ in range(20_000)]
    jump = [sample_block_discrete(law, 2**62, g2, "jump") for _ in range(20_000)]
    assert law_equality_test([o.k for o in lit], [o.k for o in jump], 12) > 1e-3
    # drop counts too, binned on a log2 scale
    nl = np.log2([o.n_drops for o in lit]).astype(int) + 1
    nj = np.log2([o.n_drops for o in jump]).astype(int) + 1
    assert law_equality_test(nl, nj, 14) > 1e-3


def _direct_clock_block(law, n_sites, rng):
    t = rng.standard_exponential(n_sites) / law.pmf(np.arange(1, n_sites + 1))
    pm = np.maximum.accumulate(t)
    after = np.append(np.minimum.accumulate(t[:0:-1])[::-1], np.inf)
    return int(np.flatnonzero(pm <= after)[0]) + 1


@pytest.mark.parametrize("p", [0.5, 0.3])
def test_clocks_match_direct_construction(p):
    # direct: every clock realized on a range whose tail mass is negligible
    law = GeometricLaw(p)
    g1, g2 = np.random.default_rng(11), np.random.default_rng(12)
    direct = [_direct_clock_block(law, 400, g1) for _ in range(20_000)]
    fast = [sample_block_clocks(law, 10**8, g2, initial_horizon=4).k for _ in range(20_000)]
    assert law_equality_test(direct, fast, 25) > 1e-3


@pytest.mark.parametrize("horizon", [1, 3, 32])
def test_block_definition_on_realized_clocks(horizon):
    rng = np.random.default_rng(horizon)
    for _ in range(300):
        out, state = run_clocks(GeometricLaw(0.3), 10**8, rng, initial_horizon=horizon)
        c = state.log_clock
        k = out.k
        assert out.capped is None
        assert 1 <= k <= c.size
        rest = min(np.min(c[k:], initial=np.inf), state.log_tail_min)
        assert np.max(c[:k]) <= rest
        assert out.log_eta == np.max(c[:k])
        for j in range(1, k):
            assert np.max(c[:j]) > min(np.min(c[j:]), state.log_tail_min)


def test_new_clocks_exceed_tail_minimum():
    rng = np.random.default_rng(3)
    out, state = run_clocks(GeometricLaw(0.1), 10**8, rng, initial_horizon=2)
    c = state.log_clock
    assert c.size == state.horizon
    assert np.all(np.isfinite(c))


def test_site_cap_on_heavy_tail(rng):
    outs = [sample_stretched_block(0.5, 200, rng) for _ in range(300)]
    capped = [o for o in outs if o.capped]
    assert capped and all(o.capped == SITE_CAP and o.k == 200 for o in capped)
    assert all(o.k < 200 for o in outs if not o.capped)


def test_site_cap_validation(rng):
    with pytest.raises(DomainError):
        sample_block_clocks(GeometricLaw(0.5), 0, rng)


def test_stretched_k1_frequency():
    rng = np.random.default_rng(99)
    n = 4000
    ks = np.array([sample_stretched_block(0.5, 10**4, rng).k for _ in range(n)])
    # K = 1 exactly when site 1 rings first
    p1 = StretchedExpLaw(0.5).pmf(1)
    assert abs((ks == 1).mean() - p1) < 3 * math.sqrt(p1 * (1 - p1) / n)


def test_clock_sampler_on_sieve():
    rng = np.random.default_rng(7)
    ks = np.array([sample_block_clocks(sieve_realize("uniform", 16, rng), 10**8, rng).k for _ in range(20_000)])
    assert abs(ks.mean() - 3.0) < 3 * math.sqrt(11 / ks.size)


def test_forgetful_mean(rng):
    p, q = 0.3, 0.2
    x = np.array([sample_forgetful(p, q, rng) for _ in range(50_000)])
    mean = 1 / (p * q)
    # variance of a geometric sum of geometrics: Geo(p*q)
    var = (1 - p * q) / (p * q) ** 2
    assert abs(x.mean() - mean) < 3 * math.sqrt(var / x.size)
    assert x.min() >= 1


def test_forgetful_domain(rng):
    with pytest.raises(DomainError):
        sample_forgetful(0.0, 0.5, rng)
    with pytest.raises(DomainError):
        sample_forgetful(0.5, 0.0, rng)


def test_jump_chain_survives_underflowing_masses():
    # at p = 0.1 site masses near the block end are far below 1e-308
    rng = np.random.default_rng(17)
    for _ in range(30):
        out = sample_block_discrete(GeometricLaw(0.1), 2**62, rng)
        assert out.k >= 1
        if out.capped:
            assert out.capped == DROP_CAP and out.n_drops == 2**62
        else:
            assert out.n_drops >= out.k


def test_jump_chain_matches_clocks_on_sieve():
    g1, g2 = np.random.default_rng(21), np.random.default_rng(22)
    jump = [sample_block_discrete(sieve_realize("uniform", 4, g1), 2**62, g1).k for _ in range(10_000)]
    clock = [sample_block_clocks(sieve_realize("uniform", 4, g2), 10**8, g2).k for _ in range(10_000)]
    assert law_equality_test(jump, clock, 12) > 1e-3
