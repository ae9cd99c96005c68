"""Bounded surrogate of a subadditive function and Monte Carlo checks of its
expectation and concentration under independent item sampling.

The surrogate caps singletons at ``cap`` and then takes the cheapest binary
split at every set::

    fbar(empty) = 0
    fbar({b})   = min(f({b}), cap)
    fbar(X)     = min(f(X), min over splits S | X-S of fbar(S) + fbar(X-S))

Binary splits reach every partition of X by repeated splitting, so this
equals the minimum over all partitions.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, log2, sqrt

import numpy as np

from ._subsets import from_mask, popcounts, proper_split_pairs, to_mask
from .errors import CapExceeded
from .valuations import as_fraction

SURROGATE_CAP = 15
Z99 = 2.576
CHUNK = 2048


def surrogate_cap(f_total, p, n_hat):
    """Singleton ceiling ``f(M) p / (80 (log2 n_hat + 1))``."""
    return Fraction(f_total) * Fraction(p) / (80 * Fraction(log2(n_hat) + 1))


def size_bound(p, n_hat):
    """Small-set size limit ``40 (log2 n_hat + 1) / p``."""
    return 40 * (log2(n_hat) + 1) / float(p)


def _lcm(values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


def _integer(values):
    den = _lcm(v.denominator for v in values)
    nums = [v.numerator * (den // v.denominator) for v in values]
    big = max((abs(x) for x in nums), default=0) > 2 ** 60
    return np.array(nums, dtype=object if big else np.int64), den


@lru_cache(maxsize=None)
def _level_splits(m):
    x, s = proper_split_pairs(m)
    order = np.lexsort((x, popcounts(m)[x]))
    x, s = x[order], s[order]
    levels = []
    pc = popcounts(m)[x]
    for size in range(2, m + 1):
        lo, hi = np.searchsorted(pc, [size, size + 1])
        xs, ss = x[lo:hi], s[lo:hi]
        if len(xs) == 0:
            continue
        heads = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
        levels.append((xs[heads], xs, ss, heads))
    return levels


@dataclass
class SurrogateTable:
    ground: tuple
    cap: Fraction
    values: list  # Fraction per bitmask over ``ground``

    def __call__(self, items):
        index = {b: i for i, b in enumerate(self.ground)}
        return self.values[to_mask(items, index)]

    @property
    def total(self):
        return self.values[-1]

    def check(self, f):
        """Exhaustive invariants: monotone, subadditive, below ``f``, singleton cap."""
        m = len(self.ground)
        size = len(self.values)
        nums, _ = _integer(list(self.values) + [self.cap] + f.value_table(self.ground))
        fb, capn, ftab = nums[:size], nums[size], nums[size + 1:]
        report = {"below_f": bool((fb <= ftab).all()),
                  "singleton_cap": all(fb[1 << i] <= capn for i in range(m))}
        mono = True
        for i in range(m):
            masks = np.arange(1 << m)
            masks = masks[(masks >> i & 1) == 0]
            if (fb[masks] > fb[masks | 1 << i]).any():
                mono = False
                break
        report["monotone"] = mono
        x, s = proper_split_pairs(m)
        report["subadditive"] = bool((fb[x] <= fb[s] + fb[x ^ s]).all()) if len(x) else True
        return report


def bounded_surrogate(f, ground, cap, size_cap=SURROGATE_CAP):
    order = tuple(sorted(ground))
    m = len(order)
    if m > size_cap:
        raise CapExceeded(f"surrogate enumerates all subsets; |ground| <= {size_cap} required")
    cap = as_fraction(cap)
    table = f.value_table(order)
    nums, den = _integer(list(table) + [cap])
    fvals, capn = nums[:-1], nums[-1]
    fb = fvals.copy()
    for i in range(m):
        fb[1 << i] = min(fvals[1 << i], capn)
    for targets, xs, ss, heads in _level_splits(m):
        cand = fb[ss] + fb[xs ^ ss]
        best = np.minimum.reduceat(cand, heads)
        fb[targets] = np.minimum(fvals[targets], best)
    values = [Fraction(int(v), den) for v in fb]
    return SurrogateTable(order, cap, values)


def half_value_precondition(f, ground, cap):
    """Sets of at most ``f(M) / (2 cap)`` items that are worth more than ``f(M)/2``.

    Returns the first violating set, or ``None`` when every small set is worth
    at most half of the ground set (which forces ``fbar(M) >= f(M)/2``).
    """
    order = tuple(sorted(ground))
    total = f(order)
    cap = as_fraction(cap)
    limit = total / (2 * cap) if cap > 0 else float("inf")
    table = f.value_table(order)
    pc = popcounts(len(order))
    for mask, val in enumerate(table):
        if pc[mask] <= limit and 2 * val > total:
            return from_mask(mask, order)
    return None


def sample_subset(ground, p, rng):
    """Each item of ``ground`` independently with probability ``p``."""
    order = sorted(ground)
    keep = rng.random(len(order)) < float(p)
    return frozenset(b for b, k in zip(order, keep) if k)


def _chunk_masks(seed_seq, size, m, p):
    rng = np.random.default_rng(seed_seq)
    bits = rng.random((size, m)) < float(p)
    return bits @ (np.int64(1) << np.arange(m, dtype=np.int64))


def sample_masks(m, p, trials, seed, workers=None, chunk=CHUNK):
    """Bitmasks of ``trials`` independent samples, reproducible for any ``workers``.

    Trials are split into fixed chunks, each drawn from its own child of the
    master seed sequence.
    """
    sizes = [min(chunk, trials - lo) for lo in range(0, trials, chunk)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(children, sizes))
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _chunk_masks(j[0], j[1], m, p), jobs))
    else:
        parts = [_chunk_masks(c, s, m, p) for c, s in jobs]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def exact_expectation(f, ground, p):
    """``E[f(R)]`` by enumerating all outcomes (exact rational for rational ``p``)."""
    order = tuple(sorted(ground))
    p = Fraction(p)
    m = len(order)
    pc = popcounts(m)
    weights = [p ** k * (1 - p) ** (m - k) for k in range(m + 1)]
    return sum((weights[int(pc[mask])] * val for mask, val in enumerate(f.value_table(order))),
               Fraction(0))


def exact_tail(f, ground, p, threshold):
    """``Pr[f(R) >= threshold]`` by outcome enumeration."""
    order = tuple(sorted(ground))
    p = Fraction(p)
    m = len(order)
    pc = popcounts(m)
    return sum((p ** int(pc[mask]) * (1 - p) ** (m - int(pc[mask]))
                for mask, val in enumerate(f.value_table(order)) if val >= threshold),
               Fraction(0))


def binomial_tail(m, p, k):
    """``Pr[Binomial(m, p) >= k]`` exactly."""
    p = Fraction(p)
    return sum((comb(m, j) * p ** j * (1 - p) ** (m - j) for j in range(max(0, k), m + 1)),
               Fraction(0))


@dataclass
class SamplingSpec:
    p: Fraction
    n_hat: int
    trials: int = 10_000
    seed: int = 0
    workers: int = None

    def __post_init__(self):
        self.p = Fraction(self.p)
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if self.n_hat < 1:
            raise ValueError("n_hat must be >= 1")


@dataclass
class ExpectationReport:
    mean: float
    half_width: float
    bound: Fraction
    trials: int
    seed: int
    passed: bool
    exact: Fraction = None
    exact_passed: bool = None


@dataclass
class ConcentrationReport:
    status: str  # "ok" or "PreconditionUnmet"
    threshold: Fraction
    target: float
    frequency: float = None
    sigma: float = None
    passed: bool = None
    trials: int = 0
    seed: int = None
    violating_set: frozenset = None
    extra: dict = field(default_factory=dict)


def _values_at(f, order, masks):
    if len(order) <= 14:
        table = f.value_table(order)
        return [table[int(x)] for x in masks]
    return [f(from_mask(int(x), order)) for x in masks]


def check_expectation_bound(f, ground, p, trials, seed=0, workers=None, exact_cap=12):
    """Empirical ``E[f(R)]`` against ``p f(ground) / 2`` with a 99% normal interval."""
    order = tuple(sorted(ground))
    p = Fraction(p)
    bound = p * f(order) / 2
    masks = sample_masks(len(order), p, trials, seed, workers)
    vals = np.array([float(v) for v in _values_at(f, order, masks)])
    mean = float(vals.mean())
    half = Z99 * float(vals.std(ddof=1)) / sqrt(trials) if trials > 1 else float("inf")
    report = ExpectationReport(mean, half, bound, trials, seed, mean >= float(bound) - half)
    if len(order) <= exact_cap:
        report.exact = exact_expectation(f, order, p)
        report.exact_passed = report.exact >= bound
    return report


def check_concentration(f, ground, spec, enforce=True):
    """Frequency of ``f(R) >= f(ground) p / 120`` against ``1 - 1/n_hat``.

    The precondition asks every set of at most ``40 (log2 n_hat + 1)/p``
    items, excluding the ground set itself, to be worth at most half of the
    ground set.  When it fails the report carries status
    ``PreconditionUnmet`` (and, with ``enforce``, no sampling is done).
    Passing means ``frequency >= target - 3 sigma`` with ``sigma`` the
    binomial standard error at the target.
    """
    order = tuple(sorted(ground))
    total = f(order)
    threshold = total * spec.p / 120
    target = 1 - 1 / spec.n_hat
    report = ConcentrationReport("ok", threshold, target, trials=spec.trials, seed=spec.seed)
    bound = size_bound(spec.p, spec.n_hat) if spec.p > 0 else float("inf")
    table = f.value_table(order)
    pc = popcounts(len(order))
    full = (1 << len(order)) - 1
    for mask, val in enumerate(table):
        if mask != full and pc[mask] <= bound and 2 * val > total:
            report.status = "PreconditionUnmet"
            report.violating_set = from_mask(mask, order)
            break
    report.extra["size_bound"] = bound
    if report.status != "ok" and enforce:
        return report
    masks = sample_masks(len(order), spec.p, spec.trials, spec.seed, spec.workers)
    hits = sum(1 for v in _values_at(f, order, masks) if v >= threshold)
    report.frequency = hits / spec.trials
    report.sigma = sqrt(target * (1 - target) / spec.trials)
    report.passed = report.frequency >= target - 3 * report.sigma
    return report
