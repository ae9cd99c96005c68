"""Seeded generators for random valuations and instances used across the tests."""
from fractions import Fraction
from itertools import combinations

import numpy as np

from subadditive_mms.core import Instance
from subadditive_mms.valuations import (XOS, Additive, BudgetAdditive, Coverage, Table,
                                        UnitDemand)

KINDS = ("additive", "unit_demand", "budget_additive", "coverage", "xos", "table")


def _ints(rng, size, lo=0, hi=6):
    return [Fraction(int(x)) for x in rng.integers(lo, hi, size)]


def random_table(rng, m):
    """A monotone set function closed under the cheapest partition (hence subadditive)."""
    raw = {}
    for size in range(m + 1):
        for combo in combinations(range(m), size):
            s = frozenset(combo)
            if not s:
                raw[s] = Fraction(0)
                continue
            base = max(raw[s - {b}] for b in s)
            raw[s] = base + int(rng.integers(0, 4))
    closed = {}
    for size in range(m + 1):
        for combo in combinations(range(m), size):
            s = frozenset(combo)
            best = raw[s]
            items = sorted(s)
            for k in range(1, len(items)):
                for part in combinations(items[1:], k - 1):
                    a = frozenset((items[0],) + part)
                    best = min(best, closed[a] + closed[s - a])
            closed[s] = best
    return Table(closed, m=m)


def random_valuation(rng, m, kind=None):
    kind = KINDS[int(rng.integers(len(KINDS)))] if kind is None else kind
    if kind == "additive":
        return Additive(_ints(rng, m, 0, 6))
    if kind == "unit_demand":
        return UnitDemand(_ints(rng, m, 0, 6))
    if kind == "budget_additive":
        w = _ints(rng, m, 0, 6)
        return BudgetAdditive(w, Fraction(int(rng.integers(1, max(2, int(sum(w))) + 1))))
    if kind == "coverage":
        u = int(rng.integers(2, 7))
        covers = [[e for e in range(u) if rng.random() < 0.4] for _ in range(m)]
        return Coverage(_ints(rng, u, 1, 5), covers)
    if kind == "xos":
        return XOS([_ints(rng, m, 0, 5) for _ in range(int(rng.integers(1, 4)))])
    if kind == "table":
        return random_table(rng, m)
    raise ValueError(kind)


def positive_valuation(rng, m, kinds=("additive", "xos", "budget_additive", "coverage")):
    """A valuation with every single item worth something (keeps shares positive)."""
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "additive":
        return Additive(_ints(rng, m, 1, 6))
    if kind == "xos":
        rows = [_ints(rng, m, 0, 5) for _ in range(int(rng.integers(1, 4)))]
        rows.append(_ints(rng, m, 1, 3))
        return XOS(rows)
    if kind == "budget_additive":
        w = _ints(rng, m, 1, 6)
        return BudgetAdditive(w, Fraction(int(sum(w)) * 2 // 3 + 1))
    u = m + 2
    covers = [[b] + [e for e in range(u) if rng.random() < 0.3] for b in range(m)]
    return Coverage(_ints(rng, u, 1, 5), covers)


def random_instance(rng, n, m, **kw):
    return Instance([positive_valuation(rng, m, **kw) for _ in range(n)], m)


def corpus(count=50, seed=2024, max_n=6, max_m=12):
    """Deterministic instances with every maximin share positive (m > n)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(n + 1, max_m + 1))
        out.append(random_instance(rng, n, m))
    return out


def random_multiallocation(rng, n, m, alpha):
    """One bundle per agent with no item in more than ``alpha`` bundles."""
    bundles = [set() for _ in range(n)]
    for b in range(m):
        holders = rng.choice(n, size=int(rng.integers(0, min(alpha, n) + 1)), replace=False)
        for i in holders:
            bundles[int(i)].add(b)
    return [frozenset(s) for s in bundles]
