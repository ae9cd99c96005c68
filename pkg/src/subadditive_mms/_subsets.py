"""Bitmask helpers for exhaustive subset enumeration."""
from functools import lru_cache

import numpy as np


def to_mask(items, index):
    """Bitmask of ``items`` where ``index`` maps item id -> bit position."""
    mask = 0
    for b in items:
        mask |= 1 << index[b]
    return mask


def from_mask(mask, order):
    """Item ids of ``order`` whose bit is set in ``mask``."""
    return frozenset(order[i] for i in range(len(order)) if mask >> i & 1)


@lru_cache(maxsize=None)
def popcounts(m):
    arr = np.zeros(1 << m, dtype=np.int64)
    for i in range(m):
        arr[1 << i:1 << (i + 1)] = arr[:1 << i] + 1
    return arr


def _ternary_pairs(m):
    """Every pair (S, T) with T a subset of S, over m bits (3**m pairs)."""
    s = np.zeros(1, dtype=np.int64)
    t = np.zeros(1, dtype=np.int64)
    for i in range(m):
        bit = 1 << i
        s = np.concatenate([s, s | bit, s | bit])
        t = np.concatenate([t, t, t | bit])
    return s, t


@lru_cache(maxsize=None)
def anchored_submask_pairs(m):
    """All pairs (S, T) with T a subset of S containing the lowest bit of S.

    Bundles of a partition are unordered, so anchoring the part that holds the
    lowest item of S enumerates every split exactly once.  Pairs are grouped by
    S in increasing order; ``starts[S]`` indexes the first pair of S.
    """
    s, t = _ternary_pairs(m)
    keep = (s != 0) & ((t & (s & -s)) != 0)
    s, t = s[keep], t[keep]
    order = np.lexsort((t, s))
    s, t = s[order], t[order]
    starts = np.searchsorted(s, np.arange((1 << m) + 1), side="left")
    for arr in (s, t, starts):
        arr.setflags(write=False)
    return s, t, starts


@lru_cache(maxsize=None)
def proper_split_pairs(m):
    """Pairs (X, S): S a nonempty proper subset of X excluding X's lowest bit.

    Each unordered binary split {S, X \\ S} of X appears exactly once.
    """
    x, s = _ternary_pairs(m)
    keep = (s != 0) & (s != x) & ((s & (x & -x)) == 0)
    x, s = x[keep], s[keep]
    x.setflags(write=False)
    s.setflags(write=False)
    return x, s
