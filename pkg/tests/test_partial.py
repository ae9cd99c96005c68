from fractions import Fraction as F
from math import ceil

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gen import corpus
from subadditive_mms.core import Instance, normalize_to_unit_mms
from subadditive_mms.errors import StandInFailed
from subadditive_mms.partial import (HALF, QUARTER, GuidingParams, disjoint_partials,
                                     half_quota, partial_half_guided, partial_quarter,
                                     quarter_quota)
from subadditive_mms.valuations import Additive

CORPUS = [normalize_to_unit_mms(inst)[0] for inst in corpus(20, seed=77, max_m=10)]


def unit_instance(n, m=None):
    m = n if m is None else m
    return normalize_to_unit_mms(Instance([Additive([1] * m)] * n, m))[0]


def pairwise_disjoint(bundles):
    seen = set()
    for b in bundles:
        if seen & b:
            return False
        seen |= b
    return True


def test_quotas():
    assert [quarter_quota(s) for s in (1, 2, 3, 4, 7)] == [1, 1, 1, 2, 3]
    assert half_quota(4, 1) == 2 and half_quota(3, 2) == 2 and half_quota(5, 3) == 4


def test_quarter_single_agent_gets_everything():
    inst = unit_instance(3)
    pa = partial_quarter(inst, [1])
    assert pa.served == (1,) and pa.bundles[1] == frozenset(inst.items)
    assert partial_quarter(inst, []).served == ()


def test_quarter_unit_items():
    for n in (3, 4, 6, 9):
        inst = unit_instance(n)
        pa = partial_quarter(inst, range(n))
        assert len(pa.served) >= quarter_quota(n)
        assert pa.check(inst)
        assert all(len(b) >= 1 for b in pa.bundles.values())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, len(CORPUS) - 1), st.integers(0, 10 ** 6))
def test_quarter_on_corpus(idx, seed):
    inst = CORPUS[idx]
    rng = np.random.default_rng(seed)
    q = sorted(int(i) for i in rng.choice(inst.n, int(rng.integers(1, inst.n + 1)), replace=False))
    pa = partial_quarter(inst, q)
    assert len(pa.served) >= quarter_quota(len(q))
    assert set(pa.served) <= set(q)
    assert pairwise_disjoint(pa.bundles.values())
    assert all(inst.valuations[i](b) >= QUARTER for i, b in pa.bundles.items())


def test_disjoint_delegates_when_k_below_one():
    inst = unit_instance(6)
    fam = disjoint_partials(inst, [0, 1])
    assert fam.k == F(1, 2) and fam.copies == 1 and len(fam.rounds) == 1
    assert fam.rounds[0] == partial_quarter(inst, [0, 1]).bundles
    with pytest.raises(ValueError):
        disjoint_partials(inst, [])


def test_disjoint_twelve_agents():
    inst = unit_instance(12)
    fam = disjoint_partials(inst, [0, 1])
    assert fam.k == 1 and fam.copies == 6 and len(fam.rounds) == 1
    assert len(fam.q_prime) >= 1
    assert sum(fam.served_copies.values()) >= quarter_quota(12)


@pytest.mark.parametrize("n", [12, 18, 24, 30, 36])
def test_disjoint_rounds(n):
    inst = unit_instance(n)
    q = [0, 1, 2] if n % 18 == 0 else [0, 1]
    fam = disjoint_partials(inst, q)
    assert fam.k == F(n, 6 * len(q))
    assert len(fam.rounds) == ceil(fam.k)
    assert fam.copies == 6 * (n // (6 * len(q)))
    assert len(fam.q_prime) >= ceil(F(len(q), 6))
    assert pairwise_disjoint(fam.bundles())
    for rnd in fam.rounds:
        assert set(rnd) == set(fam.q_prime)
        assert all(inst.valuations[i](b) >= QUARTER for i, b in rnd.items())
    for i in fam.q_prime:
        assert fam.served_copies[i] >= ceil(fam.k)
        assert fam.served_copies[i] <= fam.copies


def test_rounds_grow_with_dummy_agents():
    counts = [len(disjoint_partials(unit_instance(n), [0, 1]).rounds) for n in range(6, 31, 3)]
    assert counts == sorted(counts)


def test_half_single_and_full_sets():
    inst = unit_instance(4, 8)
    pa = partial_half_guided(inst, [2])
    assert pa.served == (2,) and inst.valuations[2](pa.bundles[2]) >= 1
    pa = partial_half_guided(inst, range(4), rng=0)
    assert pa.stats["k"] == 1 and pa.quota == 2
    assert len(pa.served) >= 2 and pa.check(inst)
    with pytest.raises(ValueError):
        partial_half_guided(inst, range(4), n_ambient=3)


def test_half_three_of_six():
    inst = unit_instance(6, 12)
    for seed in range(100):
        pa = partial_half_guided(inst, [0, 1, 2], GuidingParams(relabels=1, fallback_cap=0),
                                 rng=seed)
        assert pa.stats["k"] == 2 and pa.quota == 2
        assert pa.check(inst) and pa.strategy == "guided"
        assert all(inst.valuations[i](b) >= HALF for i, b in pa.bundles.items())


def test_half_fallback_and_failure():
    inst = unit_instance(4, 8)
    pa = partial_half_guided(inst, [0, 1], GuidingParams(relabels=0))
    assert pa.strategy.startswith("fallback_") and len(pa.served) >= pa.quota
    with pytest.raises(StandInFailed) as err:
        partial_half_guided(inst, [0, 1], GuidingParams(relabels=0, fallback_cap=0))
    assert err.value.best is not None and err.value.best.served == ()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, len(CORPUS) - 1), st.integers(0, 10 ** 6))
def test_half_on_corpus(idx, seed):
    inst = CORPUS[idx]
    rng = np.random.default_rng(seed)
    q = sorted(int(i) for i in rng.choice(inst.n, int(rng.integers(1, inst.n + 1)), replace=False))
    try:
        pa = partial_half_guided(inst, q, rng=seed)
    except StandInFailed as err:
        pa = err.best
        assert len(pa.served) < pa.quota
    assert set(pa.served) <= set(q)
    assert pairwise_disjoint(pa.bundles.values())
    assert all(inst.valuations[i](b) >= HALF for i, b in pa.bundles.items())
