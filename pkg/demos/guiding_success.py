"""Lift small base graphs, then measure how often a random seed serves both agents.

Each toy has two agents whose witness bundles are pairs of items worth 1/2
each, so an edge label serves its agent as soon as it keeps one item.
"""
from fractions import Fraction

import numpy as np

from subadditive_mms.guiding import (base_graph, build_labelling, estimate_success, girth,
                                     girth_lift)
from subadditive_mms.valuations import Additive


def toy(k, rng):
    g = girth_lift(base_graph(2, k))
    n = 2 * k
    bundles = [[frozenset({2 * j, 2 * j + 1}) for j in range(n)] for _ in range(2)]
    vals = [Additive([Fraction(1, 2)] * (2 * n))] * 2
    return g, build_labelling(g, bundles, range(2 * n), rng), vals


def main():
    for q, k in ((2, 1), (3, 2)):
        g = base_graph(q, k)
        lifted = girth_lift(g)
        print(f"base q={q} k={k}: girth {girth(g)} -> {girth(lifted)} after lifting "
              f"({lifted.n_seeds} seeds)")
    rng = np.random.default_rng(0)
    for k in (1, 2, 3):
        rates = []
        for _ in range(50):
            g, lab, vals = toy(k, rng)
            rates.append(estimate_success(g, lab, vals, 200, rng))
        print(f"k={k}: served fraction {np.mean(rates):.3f} (target {k / (k + 1):.3f}), "
              f"spread over labellings {min(rates):.3f}..{max(rates):.3f}")


if __name__ == "__main__":
    main()
