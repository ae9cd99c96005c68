import json
from fractions import Fraction as F
from itertools import product
from math import ceil, log, sqrt

import numpy as np
import pytest

from gen import corpus, random_multiallocation
from subadditive_mms.core import Instance, normalize_to_unit_mms, verify_allocation
from subadditive_mms.errors import CapExceeded
from subadditive_mms.mms import mms_profile
from subadditive_mms.pipelines import (PIPELINES, direct_search, guarantee_report,
                                       headline_bound, main_pipeline, main_round_bound,
                                       reduction_beta, reduction_wrapper, warmup1,
                                       warmup1_round_bound, warmup2, warmup2_round_bound,
                                       warmup2_threshold)
from subadditive_mms.valuations import Additive, UnitDemand

SMALL = corpus(12, seed=5, max_m=9)


def test_threshold_pinned():
    assert warmup2_threshold(10) == 64
    assert warmup2_threshold(100) == 91
    for m in (2, 10, 37, 100, 1000):
        # change of base written out separately
        assert warmup2_threshold(m) == ceil(18 * sqrt(log(m, 1.2)))


def test_round_bounds():
    assert warmup1_round_bound(1) == 1 and warmup1_round_bound(6) == 7
    assert warmup2_round_bound(6) == 12
    assert main_round_bound(3) == 2 and main_round_bound(16) == 4


def test_reduction_beta():
    assert reduction_beta(2, 4, 16) == F(1, 10800 * 2 * 4 * 3)
    assert reduction_beta(1, 2, 2) == 1
    assert headline_bound("main", 2, 5) is None
    assert headline_bound("main", 16, 5) == 432000 * 4
    with pytest.raises(ValueError):
        headline_bound("other", 4, 4)


def test_guarantee_report():
    inst = Instance([Additive([1, 1, 1, 1]), UnitDemand([0, 0, 0, 0])], 4)
    rep = guarantee_report(inst, [frozenset({0, 1}), frozenset({2, 3})])
    assert rep["values"] == [2, 0] and rep["mms"] == [2, 0]
    assert rep["ratios"] == [1, None] and rep["min_ratio"] == 1


def test_direct_search_is_best():
    rng = np.random.default_rng(1)
    for _ in range(5):
        inst = Instance([Additive([int(x) for x in rng.integers(1, 6, 5)]) for _ in range(2)], 5)
        prof = mms_profile(inst)
        got = min(guarantee_report(inst, direct_search(inst))["ratios"])
        best = F(0)
        for assign in product(range(2), repeat=5):
            bundles = [frozenset(b for b in range(5) if assign[b] == i) for i in range(2)]
            best = max(best, min(inst.valuations[i](bundles[i]) / prof[i].value
                                 for i in range(2)))
        assert got == best
    with pytest.raises(CapExceeded):
        direct_search(Instance([Additive([1] * 12)] * 4, 12), cap=1000)


def test_main_small_cases():
    inst = Instance([Additive([1, 2]), Additive([2, 1]), Additive([1, 1])], 2)
    alloc, rep = main_pipeline(inst)
    assert alloc == (frozenset({0}), frozenset({1}), frozenset())
    assert rep.constants["case"] == "m<=n"
    inst = Instance([Additive([1, 2, 3])] * 2, 3)
    alloc, rep = main_pipeline(inst)
    assert rep.constants["case"] == "n<=2" and rep.min_ratio == 1


@pytest.mark.parametrize("name", sorted(PIPELINES))
def test_pipelines_on_corpus(name):
    run = PIPELINES[name]
    bound = {"warmup1": warmup1_round_bound, "warmup2": warmup2_round_bound,
             "main": main_round_bound}[name]
    for inst in SMALL:
        alloc, rep = run(inst, seed=7)
        assert verify_allocation(alloc) and len(alloc) == inst.n
        assert all(b <= inst.items for b in alloc)
        assert rep.rounds <= bound(inst.n)
        assert all(r is None or r >= 0 for r in rep.ratios)
        assert rep.values == [v(b) for v, b in zip(inst.valuations, alloc)]
        again = run(inst, seed=7)[1]
        assert json.dumps(rep.to_json()) == json.dumps(again.to_json())


def test_warmup_layers_meet_floor():
    for inst in SMALL[:6]:
        norm, _ = normalize_to_unit_mms(inst)
        _, rep = warmup1(inst, seed=1)
        served = [i for layer in rep.layers for i in layer]
        assert sorted(served) == list(range(inst.n))
        for layer in rep.layers:
            assert all(norm.valuations[i](b) >= F(1, 4) for i, b in layer.items())
        _, rep = warmup2(inst, seed=1)
        assert rep.alpha <= rep.constants["multiplicity_limit"]


def test_main_growth_records():
    inst = corpus(1, seed=11, max_n=6, max_m=12)[0]
    while inst.n < 3:
        inst = Instance(list(inst.valuations) * 2, len(inst.items))
    _, rep = main_pipeline(inst, seed=2)
    for g in rep.extra.get("growth", []):
        assert g["floor_bound"]


def test_reduction_wrapper():
    inst = normalize_to_unit_mms(Instance([Additive([1, 1, 1, 1])] * 2, 4))[0]
    alloc, info = reduction_wrapper(inst, [frozenset({0, 1}), frozenset({2, 3})], 2)
    assert info["case"] == "bypass" and alloc == (frozenset({0, 1}), frozenset({2, 3}))
    rng = np.random.default_rng(3)
    for inst in SMALL[:6]:
        norm, _ = normalize_to_unit_mms(inst)
        ma = random_multiallocation(rng, norm.n, len(norm.items), 2)
        alloc, info = reduction_wrapper(norm, ma, 2, seed=0)
        assert verify_allocation(alloc)
        if info.get("case") == "bypass":
            continue
        for label, b in info["fixed"]:
            i = norm.agents.index(label)
            assert alloc[i] == {b} and norm.valuations[i]({b}) >= info["beta"]


def test_singleton_witnesses_are_not_dropped():
    # small witnesses overlapping across rounds used to leave every agent empty
    inst = corpus(50)[7]
    alloc, rep = main_pipeline(inst, seed=0)
    assert rep.constants["fixed_items"] > 0
    assert rep.min_ratio > 0 and all(alloc)
