from fractions import Fraction as F
from itertools import combinations
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gen import KINDS, random_valuation
from oracles import set_partitions
from subadditive_mms.concentration import (SamplingSpec, binomial_tail, bounded_surrogate,
                                           check_concentration, check_expectation_bound,
                                           exact_expectation, exact_tail,
                                           half_value_precondition, sample_masks,
                                           sample_subset, size_bound, surrogate_cap)
from subadditive_mms.errors import CapExceeded
from subadditive_mms.valuations import Additive, Table, UnitDemand


def partition_surrogate(f, items, cap):
    """Cheapest partition of ``items``, singleton parts capped at ``cap``."""
    if not items:
        return F(0)
    return min(sum(min(f(p), cap) if len(p) == 1 else f(p) for p in parts)
               for parts in set_partitions(items))


def half_flat(m):
    """Worth 1 on every non-empty proper subset and 2 on the whole ground set."""
    vals = {(): 0}
    for k in range(1, m + 1):
        for c in combinations(range(m), k):
            vals[c] = 2 if k == m else 1
    return Table(vals, m=m, check=False)


def test_formulas():
    assert surrogate_cap(160, F(1, 2), 1) == 1
    assert size_bound(F(1, 2), 4) == pytest.approx(240)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(KINDS), st.integers(1, 6), st.integers(1, 8))
def test_surrogate_matches_partitions(seed, kind, m, cap):
    rng = np.random.default_rng(seed)
    f = random_valuation(rng, m, kind)
    sur = bounded_surrogate(f, range(m), F(cap, 2))
    for k in range(m + 1):
        for c in combinations(range(m), k):
            assert sur(c) == partition_surrogate(f, c, F(cap, 2))
    assert all(sur.check(f).values())


def test_additive_low_cap():
    f = Additive([5, 3, 4, 7])
    sur = bounded_surrogate(f, range(4), 2)
    for k in range(5):
        for c in combinations(range(4), k):
            assert sur(c) == 2 * k
    with pytest.raises(CapExceeded):
        bounded_surrogate(Additive([1] * 16), range(16), 1)


def test_half_value_precondition_gives_half():
    rng = np.random.default_rng(8)
    applied = 0
    for _ in range(60):
        m = int(rng.integers(2, 8))
        f = random_valuation(rng, m)
        total = f(range(m))
        if total == 0:
            continue
        for cap in (total / 2, total / 4, total / (2 * m)):
            if half_value_precondition(f, range(m), cap) is None:
                applied += 1
                assert 2 * bounded_surrogate(f, range(m), cap).total >= total
    assert applied >= 20
    assert half_value_precondition(Additive([10, 1, 1]), range(3), 6) == frozenset({0})


def test_sample_subset():
    rng = np.random.default_rng(0)
    assert sample_subset(range(5), 0, rng) == frozenset()
    assert sample_subset(range(5), 1, rng) == frozenset(range(5))
    counts = np.zeros(6)
    trials = 10_000
    for _ in range(trials):
        for b in sample_subset(range(6), F(1, 2), rng):
            counts[b] += 1
    sigma = sqrt(trials * 0.25)
    assert (abs(counts - trials / 2) <= 4 * sigma).all()


def test_sample_masks_worker_invariant():
    a = sample_masks(9, F(1, 3), 5000, seed=4)
    b = sample_masks(9, F(1, 3), 5000, seed=4, workers=3)
    assert (a == b).all()
    assert not (a == sample_masks(9, F(1, 3), 5000, seed=5)).all()


def test_expectation_examples():
    ud = UnitDemand([1, 1])
    assert exact_expectation(ud, range(2), F(1, 2)) == F(3, 4)
    rep = check_expectation_bound(ud, range(2), F(1, 2), 10_000, seed=1)
    assert rep.passed and rep.exact_passed and rep.bound == F(1, 4)
    assert abs(rep.mean - 0.75) <= 4 * rep.half_width
    add = Additive([1, 2, 3])
    assert exact_expectation(add, range(3), F(1, 3)) == 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(KINDS), st.sampled_from([F(1, 4), F(1, 2), 1]))
def test_expectation_at_least_half_p_total(seed, kind, p):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 8))
    f = random_valuation(rng, m, kind)
    assert 2 * exact_expectation(f, range(m), p) >= p * f(range(m))


@pytest.mark.parametrize("p", [F(1, 4), F(1, 2)])
def test_concentration_half_flat(p):
    f = half_flat(10)
    rep = check_concentration(f, range(10), SamplingSpec(p, 4, trials=10_000, seed=2))
    assert rep.status == "ok" and rep.passed
    exact = exact_tail(f, range(10), p, rep.threshold)
    assert exact == 1 - (1 - p) ** 10
    assert abs(rep.frequency - float(exact)) <= 4 * sqrt(float(exact * (1 - exact)) / 10_000)


def test_concentration_precondition_unmet():
    rep = check_concentration(Additive([10, 1, 1, 1]), range(4), SamplingSpec(F(1, 2), 4))
    assert rep.status == "PreconditionUnmet" and rep.violating_set == frozenset({0})
    assert rep.frequency is None


def test_concentration_full_sample():
    rep = check_concentration(half_flat(6), range(6), SamplingSpec(1, 8, trials=200))
    assert rep.frequency == 1 and rep.passed


def test_additive_binomial_tail():
    m, p = 10, F(1, 2)
    f = Additive([1] * m)
    rep = check_concentration(f, range(m), SamplingSpec(p, 4, trials=10_000, seed=3),
                              enforce=False)
    assert rep.status == "PreconditionUnmet"
    exact = binomial_tail(m, p, 1)
    assert exact_tail(f, range(m), p, rep.threshold) == exact
    assert abs(rep.frequency - float(exact)) <= 4 * sqrt(float(exact * (1 - exact)) / 10_000)
    with pytest.raises(ValueError):
        SamplingSpec(F(3, 2), 4)
