"""Expectation and concentration of a valuation on a random item sample."""
from fractions import Fraction
from itertools import combinations

from subadditive_mms.concentration import (SamplingSpec, bounded_surrogate, check_concentration,
                                           check_expectation_bound, half_value_precondition)
from subadditive_mms.valuations import XOS, Table


def flat(m):
    vals = {(): 0}
    for k in range(1, m + 1):
        for c in combinations(range(m), k):
            vals[c] = 2 if k == m else 1
    return Table(vals, m=m, check=False)


def main():
    xos = XOS([[3, 1, 0, 2, 1, 1, 2, 0], [0, 2, 3, 1, 1, 2, 0, 2]])
    for p in (Fraction(1, 4), Fraction(1, 2)):
        rep = check_expectation_bound(xos, range(8), p, 10_000, seed=1)
        print(f"p={p}: mean {rep.mean:.3f} +- {rep.half_width:.3f}, exact {rep.exact} "
              f">= bound {rep.bound}: {rep.exact_passed}")
    f = flat(10)
    for p in (Fraction(1, 4), Fraction(1, 2)):
        rep = check_concentration(f, range(10), SamplingSpec(p, 4, trials=10_000, seed=2))
        print(f"flat, p={p}: status {rep.status}, frequency {rep.frequency:.4f} "
              f"vs target {rep.target:.2f} (sigma {rep.sigma:.4f})")
    rep = check_concentration(xos, range(8), SamplingSpec(Fraction(1, 2), 4))
    print(f"xos: status {rep.status}, small set {sorted(rep.violating_set)} is worth more than half")
    total = xos(range(8))
    for cap in (total / 2, total / 8):
        sur = bounded_surrogate(xos, range(8), cap)
        ok = half_value_precondition(xos, range(8), cap) is None
        print(f"cap {cap}: surrogate total {sur.total} of {total}, small sets below half: {ok}")


if __name__ == "__main__":
    main()
