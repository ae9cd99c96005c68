"""Exact maximin shares, beta-MMS certificates and the big-item reduction."""
import weakref
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._subsets import anchored_submask_pairs, from_mask
from .core import Instance
from .errors import CapExceeded, InvariantViolation, ZeroMMS
from .valuations import Additive, Scaled, UnitDemand, scaled

MMS_CAP = 12


@dataclass(frozen=True)
class MMSEntry:
    value: Fraction
    witness: tuple  # r disjoint frozensets covering the ground set


def mms_value(v, ground, r, cap=MMS_CAP):
    """Maximin share of ``v`` over ``ground`` split into ``r`` (possibly empty) bundles.

    Exact subset dynamic program::

        best(S, 1) = v(S)
        best(S, j) = max over T subset of S of min(v(T), best(S - T, j - 1))

    with T restricted to splits holding the lowest item of S (bundles are
    unordered).  Values are replaced by their ranks so the max/min recursion
    runs on integer arrays; the result is mapped back to the exact rational.
    Beyond ``cap`` items only closed forms (unit-demand, uniform additive) are
    available.  Returns ``(value, witness)``.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    order = tuple(sorted(ground))
    if len(order) > cap:
        closed = _closed_form(v, order, r)
        if closed is None:
            raise CapExceeded(f"mms_value needs |ground| <= {cap}, got {len(order)}")
        return closed
    return _mms_dp(v, order, r)


def _mms_dp(v, order, r):
    k = len(order)
    full = (1 << k) - 1
    values = v.value_table(order)
    distinct = sorted(set(values))
    rank_of = {x: i for i, x in enumerate(distinct)}
    rank = np.fromiter((rank_of[x] for x in values), dtype=np.int64, count=len(values))
    if r == 1 or k == 0:
        witness = (frozenset(order),) + (frozenset(),) * (r - 1)
        return values[full], witness

    s_arr, t_arr, starts = anchored_submask_pairs(k)
    layers = [rank]
    zero_rank = rank_of[Fraction(0)]
    for _ in range(2, r + 1):
        prev = layers[-1]
        cand = np.minimum(rank[t_arr], prev[s_arr ^ t_arr])
        best = np.empty_like(rank)
        best[0] = zero_rank
        best[1:] = np.maximum.reduceat(cand, starts[1:-1])
        layers.append(best)

    # top-down reconstruction, lexicographically smallest first bundle on ties
    bundles = []
    s = full
    for j in range(r, 1, -1):
        if s == 0:
            break
        lo, hi = starts[s], starts[s + 1]
        ts = t_arr[lo:hi]
        ok = np.minimum(rank[ts], layers[j - 2][s ^ ts]) == layers[j - 1][s]
        choices = [int(t) for t in ts[ok]]
        t = min(choices, key=lambda mask: sorted(_bits(mask)))
        bundles.append(from_mask(t, order))
        s ^= t
    if s:
        bundles.append(from_mask(s, order))
    bundles += [frozenset()] * (r - len(bundles))
    return distinct[int(layers[r - 1][full])], tuple(bundles)


def _bits(mask):
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _closed_form(v, order, r):
    scale = Fraction(1)
    base = v
    if isinstance(v, Scaled):
        scale, base = v.scale, v.base
    if isinstance(base, UnitDemand):
        # the r most valuable items go to separate bundles
        ranked = sorted(order, key=lambda b: (-base.weights[b], b))
        if r > len(ranked):
            value = Fraction(0)
        else:
            value = base.weights[ranked[r - 1]]
        bundles = [{b} for b in ranked[:r]] + [set() for _ in range(r - len(ranked[:r]))]
        for b in ranked[r:]:
            bundles[0].add(b)
        return scale * value, tuple(frozenset(x) for x in bundles)
    if isinstance(base, Additive) and len({base.weights[b] for b in order}) <= 1:
        w = base.weights[order[0]] if order else Fraction(0)
        bundles = [set() for _ in range(r)]
        for pos, b in enumerate(order):
            bundles[pos % r].add(b)
        return scale * w * (len(order) // r), tuple(frozenset(x) for x in bundles)
    return None


_PROFILES = weakref.WeakKeyDictionary()


def mms_profile(inst):
    """Per-agent MMS entries over ``inst.items`` with ``r = inst.n`` (cached per instance)."""
    prof = _PROFILES.get(inst)
    if prof is None:
        prof = tuple(MMSEntry(*mms_value(v, inst.items, inst.n)) for v in inst.valuations)
        _PROFILES[inst] = prof
    return prof


def _seed_profile(inst, entries):
    _PROFILES[inst] = tuple(entries)


@dataclass
class BetaCertificate:
    beta: Fraction
    allocation: tuple
    ratios: list  # Fraction, or None where MMS is 0
    violations: list = field(default_factory=list)

    def __bool__(self):
        return not self.violations


def certify_beta_mms(inst, alloc, beta, profile=None):
    """Check ``V_i(A_i) >= beta * MMS_i`` for every agent, exactly.

    Always returns a :class:`BetaCertificate`; it is falsy and lists the
    offending ``(agent, value, mms)`` triples when some agent falls short.
    """
    beta = Fraction(beta)
    profile = mms_profile(inst) if profile is None else profile
    ratios, bad = [], []
    for i, (v, bundle) in enumerate(zip(inst.valuations, alloc)):
        val, mms = v(bundle), profile[i].value
        ratios.append(val / mms if mms else None)
        if val < beta * mms:
            bad.append((inst.agents[i], val, mms))
    return BetaCertificate(beta, tuple(frozenset(b) for b in alloc), ratios, bad)


def big_item_reduction(inst, beta):
    """Give away single items worth at least ``beta`` and renormalize the rest.

    ``inst`` must be normalized (every MMS equals 1).  While some agent values a
    single active item at ``>= beta``, the first such agent takes its most
    valuable item and leaves; the surviving agents' MMS over the remaining
    items with one bundle fewer is recomputed, checked not to decrease, and
    rescaled to 1.  Returns ``(residual, fixed)`` where ``fixed`` lists
    ``(agent label, item)`` pairs.
    """
    beta = Fraction(beta)
    current, fixed = inst, []
    while current.n:
        pick = _big_item(current, beta)
        if pick is None:
            break
        i, b = pick
        fixed.append((current.agents[i], b))
        before = mms_profile(current)
        keep = [j for j in range(current.n) if j != i]
        nxt = Instance([current.valuations[j] for j in keep], current.m,
                       current.items - {b}, [current.agents[j] for j in keep])
        if not nxt.n:
            current = nxt
            break
        after = mms_profile(nxt)
        for pos, j in enumerate(keep):
            if after[pos].value < before[j].value:
                raise InvariantViolation(
                    f"MMS of agent {current.agents[j]} dropped from "
                    f"{before[j].value} to {after[pos].value} after removing item {b}")
            if after[pos].value == 0:
                raise ZeroMMS(f"agent {current.agents[j]} has maximin share 0")
        current = nxt.with_valuations(
            scaled(nxt.valuations[pos], 1 / after[pos].value) for pos in range(nxt.n))
        _seed_profile(current, [MMSEntry(Fraction(1), e.witness) for e in after])
    return current, fixed


def _big_item(inst, beta):
    for i, v in enumerate(inst.valuations):
        best = None
        for b in sorted(inst.items):
            val = v({b})
            if val >= beta and (best is None or val > best[0]):
                best = (val, b)
        if best is not None:
            return i, best[1]
    return None
