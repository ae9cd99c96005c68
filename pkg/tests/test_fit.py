from fractions import Fraction as F
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from gen import KINDS, random_table, random_valuation
from oracles import constraint_system, vertex_oracle
from subadditive_mms.additive_fit import fit_additive_lower, fit_ratio, ratio_floor
from subadditive_mms.errors import CapExceeded
from subadditive_mms.lp import Unbounded, lex_maximize
from subadditive_mms.valuations import Additive, Table, UnitDemand


def test_lp_against_linprog():
    rng = np.random.default_rng(0)
    for _ in range(30):
        rows, cols = int(rng.integers(2, 6)), int(rng.integers(2, 5))
        A = rng.integers(0, 4, (rows, cols)).tolist()
        A.append([1] * cols)
        b = rng.integers(0, 8, rows + 1).tolist()
        c = rng.integers(-2, 5, cols).tolist()
        x, z = lex_maximize(A, b, [c])
        ref = linprog(-np.array(c, dtype=float), A_ub=A, b_ub=b, bounds=[(0, None)] * cols)
        assert abs(float(z[0]) + ref.fun) < 1e-9
        assert all(sum(F(a) * xi for a, xi in zip(row, x)) <= bi for row, bi in zip(A, b))
        assert sum(F(ci) * xi for ci, xi in zip(c, x)) == z[0]


def test_lp_unbounded_and_bad_rhs():
    with pytest.raises(Unbounded):
        lex_maximize([[1, -1]], [1], [[1, 1]])
    with pytest.raises(ValueError):
        lex_maximize([[1]], [-1], [[1]])


def test_lexicographic_tiebreak():
    # x0 + x1 <= 1: every split is optimal for the sum; lex order prefers x0
    x, z = lex_maximize([[1, 1]], [1], [[1, 1], [1, 0], [0, 1]])
    assert x == [1, 0] and z[0] == 1


def test_fit_examples():
    add = Additive([3, 1, 2])
    fit = fit_additive_lower(add, {0, 1, 2})
    assert fit.weights == {0: 3, 1: 1, 2: 2} and fit.total == 6
    assert fit_ratio(fit, add) == 1
    ud = UnitDemand([1, 1])
    fit = fit_additive_lower(ud, {0, 1})
    assert fit.total == 1 and fit.weights == {0: 1, 1: 0}
    assert fit_ratio(fit, ud) == 1 >= ratio_floor(2)
    single = fit_additive_lower(ud, {1})
    assert single.weights == {1: 1} and fit_ratio(single, ud) == 1
    assert fit_ratio(fit_additive_lower(Additive([0, 0]), {0, 1}), Additive([0, 0])) == 1
    with pytest.raises(CapExceeded):
        fit_additive_lower(Additive([1] * 17), range(17))


def check_underestimate(v, fit):
    order = sorted(fit.base_set)
    for k in range(1, len(order) + 1):
        for combo in combinations(order, k):
            assert fit.of(combo) <= v(combo)
    assert all(w >= 0 for w in fit.weights.values())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(KINDS), st.integers(2, 5))
def test_fit_matches_vertex_oracle(seed, kind, k):
    rng = np.random.default_rng(seed)
    v = random_valuation(rng, k, kind)
    fit = fit_additive_lower(v, range(k))
    check_underestimate(v, fit)
    best, lex = vertex_oracle(v, tuple(range(k)))
    assert abs(float(fit.total) - best) < 1e-9
    assert np.allclose([float(fit.weights[b]) for b in range(k)], lex, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 8))
def test_fit_optimal_against_linprog(seed, k):
    rng = np.random.default_rng(seed)
    v = random_valuation(rng, k)
    fit = fit_additive_lower(v, range(k))
    A, b = constraint_system(v, tuple(range(k)))
    ref = linprog(-np.ones(k), A_ub=A, b_ub=b, bounds=[(0, None)] * k)
    assert abs(float(fit.total) + ref.fun) < 1e-7


def test_ratio_floor_on_tables():
    rng = np.random.default_rng(4)
    for _ in range(20):
        t = random_table(rng, 4)
        fit = fit_additive_lower(t, range(4))
        assert fit_ratio(fit, t) >= F(1, 6)


def test_relabel_symmetry():
    rng = np.random.default_rng(9)
    for _ in range(10):
        t = random_table(rng, 4)
        perm = rng.permutation(4)
        relabeled = Table({frozenset(int(perm[b]) for b in s): val for s, val in t.values.items()},
                          m=4)
        assert fit_additive_lower(t, range(4)).total == fit_additive_lower(relabeled, range(4)).total
