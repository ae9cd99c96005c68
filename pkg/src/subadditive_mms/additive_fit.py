"""Largest additive underestimate of a subadditive valuation on a witness set.

For a set ``X`` the fit solves, exactly::

    maximize    sum_{b in X} w_b
    subject to  sum_{b in Y} w_b <= V(Y)   for every Y subset of X
                w >= 0

Among optimal solutions the lexicographically greatest weight vector (items
in increasing id order) is returned, so fits are reproducible.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import log2

from .errors import CapExceeded
from .lp import lex_maximize

LP_CAP = 16


@dataclass(frozen=True)
class AdditiveFit:
    base_set: frozenset
    weights: dict  # item -> Fraction

    @property
    def total(self):
        return sum(self.weights.values(), Fraction(0))

    def of(self, items):
        return sum((self.weights.get(b, Fraction(0)) for b in items), Fraction(0))

    def max_weight(self):
        return max(self.weights.values(), default=Fraction(0))


def fit_additive_lower(v, x, cap=LP_CAP):
    order = sorted(x)
    k = len(order)
    if k > cap:
        raise CapExceeded(f"additive fit enumerates 2^|x| constraints; |x| <= {cap} required")
    if k <= 1:
        return AdditiveFit(frozenset(order), {b: v({b}) for b in order})
    table = v.value_table(order)
    A, b = [], []
    for mask in range(1, 1 << k):
        A.append([1 if mask >> j & 1 else 0 for j in range(k)])
        b.append(table[mask])
    objectives = [[1] * k] + [[1 if j == t else 0 for j in range(k)] for t in range(k)]
    w, _ = lex_maximize(A, b, objectives)
    return AdditiveFit(frozenset(order), dict(zip(order, w)))


def fit_ratio(fit, v):
    """``sum(weights) / V(base_set)``; 1 for degenerate sets or zero value."""
    if len(fit.base_set) <= 1:
        return Fraction(1)
    total = v(fit.base_set)
    if total == 0:
        return Fraction(1)
    return fit.total / total


def ratio_floor(size):
    """The cited lower bound ``1 / (3 log2 |X|)`` on :func:`fit_ratio` (``|X| >= 2``)."""
    return 1 / (3 * log2(size))
