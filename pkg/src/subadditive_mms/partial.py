"""Partial allocations that serve a guaranteed share of an agent set.

All instances here are normalized (every agent's maximin share is 1), so a
bundle "serves" an agent when its value reaches the floor: 1/4 for the
quarter engines, 1/2 for the guided engine.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, floor

import numpy as np

from .errors import InvariantViolation, StandInFailed
from .guiding import base_graph, build_labelling, girth_lift, served_at, LIFT_CAP
from .mms import mms_profile

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)
BRUTE_CAP = 10
SEARCH_BUDGET = 200_000


@dataclass
class PartialAllocation:
    served: tuple
    bundles: dict  # served agent -> frozenset
    floor: Fraction
    quota: int
    strategy: str
    stats: dict = field(default_factory=dict)

    def check(self, inst):
        seen = set()
        for i in self.served:
            b = self.bundles[i]
            if seen & b or inst.valuations[i](b) < self.floor:
                return False
            seen |= b
        return True


@dataclass
class DisjointFamily:
    q_prime: tuple
    rounds: list  # list of {agent: frozenset}
    k: Fraction
    copies: int  # replicas per agent
    served_copies: dict  # agent -> number of its served replicas
    base: PartialAllocation

    def bundles(self):
        return [b for rnd in self.rounds for b in rnd.values()]


@dataclass
class GuidingParams:
    lift_rounds: int = 1
    epsilon: Fraction = Fraction(1, 10)
    trials: int = 100
    seed: int = 0
    relabels: int = 5
    edge_budget: int = 1 << 17
    fallback_cap: int = 4


def _agent_max_order(valuations, items):
    best = {b: max(v({b}) for v in valuations) for b in items}
    return sorted(items, key=lambda b: (-best[b], b))


def _bag_fill(valuations, items, floor_):
    """Grow a bag item by item; hand it to the first unserved slot that reaches the floor."""
    open_slots = list(range(len(valuations)))
    remaining = set(items)
    out = {}
    bag = []
    while remaining and open_slots:
        order = _agent_max_order([valuations[s] for s in open_slots], remaining)
        for b in order:
            bag.append(b)
            remaining.discard(b)
            hit = next((s for s in open_slots if valuations[s](bag) >= floor_), None)
            if hit is not None:
                out[hit] = frozenset(bag)
                open_slots.remove(hit)
                bag = []
                break
        else:
            break
    return out


def _pack(candidates, quota, budget=SEARCH_BUDGET):
    """Pick pairwise disjoint candidate bundles for as many slots as possible.

    ``candidates[s]`` lists bundles for slot ``s``.  Stops as soon as ``quota``
    slots are served; returns the best assignment found within ``budget``
    search nodes.
    """
    slots = len(candidates)
    best = {}
    chosen = {}
    nodes = 0

    def rec(s, used):
        nonlocal best, nodes
        nodes += 1
        if len(chosen) > len(best):
            best = dict(chosen)
        if len(best) >= quota or nodes > budget or s == slots:
            return
        if len(chosen) + (slots - s) <= len(best):
            return
        for bundle in candidates[s]:
            if used.isdisjoint(bundle):
                chosen[s] = bundle
                rec(s + 1, used | bundle)
                del chosen[s]
                if len(best) >= quota or nodes > budget:
                    return
        rec(s + 1, used)

    rec(0, frozenset())
    return best


def _minimal_bundles(v, items, floor_):
    """Inclusion-minimal subsets of ``items`` worth at least ``floor_``."""
    found = []
    for size in range(len(items) + 1):
        for combo in combinations(items, size):
            s = frozenset(combo)
            if any(f <= s for f in found):
                continue
            if v(s) >= floor_:
                found.append(s)
    return found


def _serve(valuations, items, witnesses, floor_, quota, brute_cap=BRUTE_CAP):
    """Layered stand-in: bag filling, then witness packing, then brute force."""
    items = sorted(items)
    tried = {}
    got = _bag_fill(valuations, items, floor_)
    tried["bag_filling"] = len(got)
    best, strategy = got, "bag_filling"
    if len(got) >= quota:
        return got, strategy, tried
    cands = [[w for w in ws if valuations[s](w) >= floor_] for s, ws in enumerate(witnesses)]
    got = _pack(cands, quota)
    tried["witness_search"] = len(got)
    if len(got) > len(best):
        best, strategy = got, "witness_search"
    if len(best) >= quota:
        return best, strategy, tried
    if len(items) <= brute_cap:
        cache = {}
        cands = []
        for v in valuations:
            if id(v) not in cache:
                cache[id(v)] = _minimal_bundles(v, items, floor_)
            cands.append(cache[id(v)])
        got = _pack(cands, quota)
        tried["brute_force"] = len(got)
        if len(got) > len(best):
            best, strategy = got, "brute_force"
    return best, strategy, tried


def quarter_quota(q_size):
    return ceil(Fraction(q_size, 3))


def partial_quarter(inst, q, profile=None, brute_cap=BRUTE_CAP):
    """Serve at least ``ceil(|q|/3)`` agents of ``q`` with disjoint bundles worth 1/4."""
    q = sorted(q)
    quota = quarter_quota(len(q))
    if not q:
        return PartialAllocation((), {}, QUARTER, 0, "empty")
    if len(q) == 1:
        i = q[0]
        return PartialAllocation((i,), {i: frozenset(inst.items)}, QUARTER, 1, "single_agent")
    profile = mms_profile(inst) if profile is None else profile
    vals = [inst.valuations[i] for i in q]
    wits = [profile[i].witness for i in q]
    got, strategy, tried = _serve(vals, inst.items, wits, QUARTER, quota, brute_cap)
    result = PartialAllocation(tuple(sorted(q[s] for s in got)),
                               {q[s]: b for s, b in got.items()}, QUARTER, quota, strategy,
                               {"tried": tried})
    if len(got) < quota:
        raise StandInFailed(f"served {len(got)} of quota {quota} at floor 1/4", best=result)
    return result


def disjoint_partials(inst, q, profile=None, brute_cap=BRUTE_CAP):
    """``ceil(k)`` mutually disjoint 1/4-allocations for a sixth of ``q``, ``k = n/(6|q|)``.

    Each agent of ``q`` is replicated ``6 floor(k)`` times, one quarter
    allocation is computed for the replicas, and agents with at least
    ``ceil(k)`` served replicas keep one replica bundle per round.
    """
    q = sorted(q)
    if not q:
        raise ValueError("q must be non-empty")
    k = Fraction(inst.n, 6 * len(q))
    if floor(k) < 1:
        pa = partial_quarter(inst, q, profile, brute_cap)
        return DisjointFamily(pa.served, [dict(pa.bundles)], k, 1,
                              {i: int(i in pa.bundles) for i in q}, pa)
    profile = mms_profile(inst) if profile is None else profile
    copies = 6 * floor(k)
    slots = [i for i in q for _ in range(copies)]
    vals = [inst.valuations[i] for i in slots]
    wits = [profile[i].witness for i in slots]
    quota = quarter_quota(len(slots))
    got, strategy, tried = _serve(vals, inst.items, wits, QUARTER, quota, brute_cap)
    per_agent = {i: [] for i in q}
    for s in sorted(got):
        per_agent[slots[s]].append(got[s])
    base = PartialAllocation(tuple(sorted(set(slots[s] for s in got))), {}, QUARTER, quota,
                             strategy, {"tried": tried, "served_copies": len(got)})
    if len(got) < quota:
        raise StandInFailed(f"served {len(got)} of {quota} replicas at floor 1/4", best=base)
    need = ceil(k)
    q_prime = tuple(i for i in q if len(per_agent[i]) >= need)
    if len(q_prime) < ceil(Fraction(len(q), 6)):
        # at most 6 floor(k) copies per selected agent and ceil(k)-1 per other agent
        few = ceil(Fraction(len(q), 6)) - 1
        bound = few * copies + (len(q) - few) * (need - 1)
        raise InvariantViolation(f"{len(got)} served replicas but only {len(q_prime)} agents "
                                 f"reach {need}; counting bound {bound}")
    rounds = [{i: per_agent[i][j] for i in q_prime} for j in range(need)]
    served = {i: len(per_agent[i]) for i in q}
    return DisjointFamily(q_prime, rounds, k, copies, served, base)


def half_quota(q_size, k):
    return ceil(Fraction(q_size * k, k + 1))


def guided_graph(q_size, k, params):
    g = base_graph(q_size, k)
    for _ in range(params.lift_rounds):
        r = g.n_edges
        if r > LIFT_CAP or r * (1 << r) > params.edge_budget:
            break
        g = girth_lift(g)
    return g


def partial_half_guided(inst, q, params=None, rng=None, profile=None, n_ambient=None):
    """Serve ``ceil(|q| k/(k+1))`` agents of ``q`` at floor 1/2 via guiding-graph sampling.

    ``k = floor(n / |q|)`` with ``n`` the ambient agent count (``inst.n``
    unless given).  Each relabelling draws fresh node labels and tries up to
    ``params.trials`` distinct seed nodes; small ``q`` falls back to an
    exhaustive bundle assignment.
    """
    params = GuidingParams() if params is None else params
    rng = np.random.default_rng(params.seed if rng is None else rng)
    q = sorted(q)
    n = inst.n if n_ambient is None else n_ambient
    if not q:
        return PartialAllocation((), {}, HALF, 0, "empty")
    if len(q) > n:
        raise ValueError("q larger than the ambient agent count")
    profile = mms_profile(inst) if profile is None else profile
    k = n // len(q)
    quota = half_quota(len(q), k)
    wits = [[b for b in profile[i].witness if b] for i in q]
    vals = [inst.valuations[i] for i in q]
    if len(q) == 1:
        i = q[0]
        return PartialAllocation((i,), {i: wits[0][0]}, HALF, 1, "single_agent", {"k": k})

    g = guided_graph(len(q), k, params)
    items = sorted(inst.items)
    stats = {"k": k, "n_seeds": g.n_seeds, "n_edges": g.n_edges, "relabels": 0, "seeds_tried": 0}
    best = {}
    for _ in range(params.relabels):
        stats["relabels"] += 1
        lab = build_labelling(g, wits, items, rng)
        seeds = rng.permutation(g.n_seeds)[:params.trials]
        for s in seeds:
            stats["seeds_tried"] += 1
            ok = served_at(g, lab, vals, int(s), HALF)
            if len(ok) > len(best):
                best = {t: lab.edge_label(g, int(s), t) for t in ok}
            if len(ok) >= quota:
                stats["tree_fraction"] = lab.stats["tree_fraction"]
                return _half_result(q, best, quota, "guided", stats)
    if len(q) <= params.fallback_cap:
        got, strategy, tried = _serve(vals, items, wits, HALF, quota)
        stats["fallback"] = tried
        if len(got) > len(best):
            best = got
        if len(best) >= quota:
            return _half_result(q, best, quota, "fallback_" + strategy, stats)
    raise StandInFailed(f"served {len(best)} of quota {quota} at floor 1/2",
                        best=_half_result(q, best, quota, "guided", stats))


def _half_result(q, got, quota, strategy, stats):
    return PartialAllocation(tuple(sorted(q[t] for t in got)),
                             {q[t]: b for t, b in got.items()}, HALF, quota, strategy, stats)
