"""Turn an alpha-multiallocation into a disjoint allocation.

Agents whose bundle holds a small half-value subset ("easy" agents) are
resolved through an additive underestimate and a bipartite matching over
blocks of ``alpha`` items; the remaining ("hard") agents get each contested
item by a uniform draw.  The two partial allocations are then merged block by
block, and the hard-agent draw is repeated until every hard agent keeps at
least ``1/(480 alpha)`` of its original bundle value.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, log2

import numpy as np

from .additive_fit import fit_additive_lower
from .core import multiplicity, verify_allocation
from .errors import CapExceeded, InvariantViolation, MatchingIncomplete, RetriesExhausted
from .matching import capacitated_matching

WITNESS_SEARCH_CAP = 18
PAIR_CAP = 20
HARD_FACTOR = 480


def default_tau(alpha, n, scale=1):
    """Witness size threshold ``ceil(scale * 80 alpha (log2 n + 1))``, at least 1."""
    return max(1, ceil(scale * 80 * alpha * (log2(max(n, 1)) + 1)))


def converter_bound(alpha, n):
    """Denominator ``480 alpha (log2(80 alpha) + log2(log2 n + 1))`` of the conversion loss."""
    return HARD_FACTOR * alpha * (log2(80 * alpha) + log2(log2(max(n, 1)) + 1))


@dataclass
class AgentClass:
    easy: dict  # agent -> witness X_i
    hard: frozenset
    tau: int


@dataclass
class BlockStructure:
    size: int
    blocks: dict  # agent -> list of item tuples, heaviest first


@dataclass
class Conversion:
    allocation: tuple
    alpha: int
    classes: AgentClass
    easy_bundles: dict
    hard_bundles: dict
    fits: dict
    blocks: BlockStructure
    pair_blocks: BlockStructure
    attempts: int
    trace: dict = field(default_factory=dict)


def classify_agents(inst, ma, tau, search_cap=WITNESS_SEARCH_CAP):
    """Split agents into easy (with a witness of at most ``tau`` items) and hard."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    easy, hard = {}, []
    for i, bundle in enumerate(ma):
        v = inst.valuations[i]
        witness = _find_witness(v, frozenset(bundle), tau, search_cap)
        if witness is None:
            hard.append(i)
        else:
            easy[i] = witness
    return AgentClass(easy, frozenset(hard), tau)


def _find_witness(v, bundle, tau, search_cap):
    whole = v(bundle)
    items = sorted(bundle)
    limit = min(tau, len(items))
    if len(items) <= search_cap:
        for size in range(limit + 1):
            for combo in combinations(items, size):
                if 2 * v(combo) >= whole:
                    return frozenset(combo)
        return None
    chosen = set()
    while 2 * v(chosen) < whole and len(chosen) < limit:
        base = v(chosen)
        chosen.add(max((b for b in items if b not in chosen),
                       key=lambda b: (v(chosen | {b}) - base, -b)))
    if 2 * v(chosen) >= whole:
        return frozenset(chosen)
    raise CapExceeded(f"bundle of {len(items)} items exceeds the witness search cap "
                      f"{search_cap} and greedy found no witness")


def _by_weight(items, fit):
    return sorted(items, key=lambda b: (-fit.weights.get(b, Fraction(0)), b))


def resolve_easy(inst, ma, cls, alpha):
    """Disjoint bundles for easy agents via matching items to weight-sorted blocks.

    Returns ``(bundles, fits, blocks)`` keyed by easy agent.
    """
    fits, blocks = {}, {}
    block_owner, adj = [], []
    for i in sorted(cls.easy):
        fit = fit_additive_lower(inst.valuations[i], cls.easy[i])
        fits[i] = fit
        ordered = _by_weight(cls.easy[i], fit)
        own = [tuple(ordered[j:j + alpha]) for j in range(0, len(ordered) - alpha + 1, alpha)]
        blocks[i] = own
        for blk in own:
            block_owner.append(i)
            adj.append(list(blk))
    matched = capacitated_matching(adj)
    bundles = {i: set() for i in cls.easy}
    for owner, got, blk in zip(block_owner, matched, adj):
        if not got:
            raise MatchingIncomplete(
                f"block {blk} of agent {owner} unmatched; input is not an {alpha}-multiallocation")
        bundles[owner].add(got[0])
    return ({i: frozenset(b) for i, b in bundles.items()}, fits,
            BlockStructure(alpha, blocks))


def resolve_hard(ma, cls, rng):
    """Give every item held by hard agents to one of them, uniformly at random."""
    holders = {}
    for i in sorted(cls.hard):
        for b in ma[i]:
            holders.setdefault(b, []).append(i)
    out = {i: set() for i in cls.hard}
    for b in sorted(holders):
        owners = holders[b]
        pick = owners[0] if len(owners) == 1 else owners[int(rng.integers(len(owners)))]
        out[pick].add(b)
    return {i: frozenset(s) for i, s in out.items()}


def merge(inst, easy_bundles, hard_bundles, fits, cls, rng, pair_cap=PAIR_CAP):
    """Resolve items shared between one easy and one hard agent.

    Returns ``(allocation, pair_blocks, trace)``.  Each easy bundle is cut into
    weight-sorted pairs (a zero-value dummy ``m + i`` pads odd counts) and every
    pair leaves at least one item with its easy owner.
    """
    n, m = inst.n, inst.m
    owner_e = {b: i for i, s in easy_bundles.items() for b in s}
    owner_h = {b: h for h, s in hard_bundles.items() for b in s}
    shared = owner_e.keys() & owner_h.keys()
    final = [set() for _ in range(n)]
    for b, i in owner_e.items():
        if b not in shared:
            final[i].add(b)
    for b, h in owner_h.items():
        if b not in shared:
            final[h].add(b)

    pairs, linked = {}, {}
    trace = {"unique": 0, "one_shared": 0, "coin": 0, "linked": 0}
    for i in sorted(easy_bundles):
        ordered = _by_weight(easy_bundles[i], fits[i])
        if len(ordered) % 2:
            ordered.append(m + i)
        own = [(ordered[j], ordered[j + 1]) for j in range(0, len(ordered), 2)]
        pairs[i] = own
        for y, z in own:
            sy, sz = y in shared, z in shared
            if not sy and not sz:
                trace["unique"] += 1
            elif sy != sz:
                trace["one_shared"] += 1
                s = y if sy else z
                final[owner_h[s]].add(s)
            elif owner_h[y] != owner_h[z]:
                trace["coin"] += 1
                keep, give = (y, z) if rng.integers(2) == 0 else (z, y)
                final[i].add(keep)
                final[owner_h[give]].add(give)
            else:
                trace["linked"] += 1
                linked.setdefault(owner_h[y], []).append((y, z, i))

    for h in sorted(linked):
        kept = _choose_linked(inst.valuations[h], frozenset(final[h]), linked[h], pair_cap)
        for (y, z, i), take in zip(linked[h], kept):
            final[h].add(take)
            final[i].add(z if take == y else y)

    alloc = tuple(frozenset(b for b in s if b < m) for s in final)
    if not verify_allocation(alloc):
        raise InvariantViolation("merge produced overlapping bundles")
    return alloc, BlockStructure(2, pairs), trace


def _choose_linked(v, base, pairs, pair_cap):
    """One item per linked pair, maximizing the hard agent's final value."""
    p = len(pairs)
    if p <= pair_cap:
        best, best_val = None, None
        for mask in range(1 << p):
            pick = [pair[mask >> j & 1] for j, pair in enumerate(pairs)]
            val = v(base | frozenset(pick))
            if best_val is None or val > best_val:
                best, best_val = pick, val
        return best
    current, pick = set(base), []
    for y, z, _ in pairs:
        take = y if v(current | {y}) >= v(current | {z}) else z
        current.add(take)
        pick.append(take)
    return pick


def convert_multiallocation(inst, ma, tau=None, max_retries=1000, rng=None,
                            pair_cap=PAIR_CAP, tau_scale=1):
    """Full conversion record; see :func:`multialloc_to_alloc`."""
    rng = np.random.default_rng(rng)
    ma = tuple(frozenset(b) for b in ma)
    alpha = max(1, multiplicity(ma))
    if tau is None:
        tau = default_tau(alpha, inst.n, tau_scale)
    cls = classify_agents(inst, ma, tau)
    easy_bundles, fits, blocks = resolve_easy(inst, ma, cls, alpha)
    best = None
    for attempt in range(1, max_retries + 2):
        hard_bundles = resolve_hard(ma, cls, rng)
        alloc, pair_blocks, trace = merge(inst, easy_bundles, hard_bundles, fits, cls, rng,
                                          pair_cap)
        failing = [h for h in sorted(cls.hard)
                   if HARD_FACTOR * alpha * inst.valuations[h](alloc[h])
                   < inst.valuations[h](ma[h])]
        result = Conversion(alloc, alpha, cls, easy_bundles, hard_bundles, fits, blocks,
                            pair_blocks, attempt, trace)
        if not failing:
            return result
        if best is None or len(failing) < best[0]:
            best = (len(failing), failing, result)
    raise RetriesExhausted(f"hard agents {best[1]} below V(A)/(480*{alpha}) after "
                           f"{max_retries} retries", failing=best[1], best=best[2])


def multialloc_to_alloc(inst, ma, tau=None, max_retries=1000, rng=None,
                        pair_cap=PAIR_CAP, tau_scale=1):
    """Disjoint allocation from an alpha-multiallocation ``ma`` (one bundle per agent)."""
    return convert_multiallocation(inst, ma, tau, max_retries, rng, pair_cap,
                                   tau_scale).allocation
