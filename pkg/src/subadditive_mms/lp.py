"""Small dense simplex over exact rationals.

Solves ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0`` (the origin is
feasible, so no phase one is needed).  Several objectives can be optimized
lexicographically: later objectives only move along the optimal face of the
earlier ones.  Bland's rule keeps the heavily degenerate subset LPs from
cycling.
"""
from fractions import Fraction


class Unbounded(ArithmeticError):
    pass


def lex_maximize(A, b, objectives):
    """Return ``(x, values)``: the lexicographic optimum and each objective's value."""
    n = len(objectives[0])
    rows = [[Fraction(a) for a in row] for row in A]
    rhs = [Fraction(v) for v in b]
    if any(v < 0 for v in rhs):
        raise ValueError("lex_maximize requires b >= 0")
    basic = [n + i for i in range(len(rows))]
    nonbasic = list(range(n))
    costs = [[Fraction(c) for c in obj] for obj in objectives]
    z = [Fraction(0)] * len(costs)
    frozen = set()

    for level in range(len(costs)):
        cost = costs[level]
        while True:
            enter = None
            for j in range(n):
                if j in frozen or cost[j] <= 0:
                    continue
                if enter is None or nonbasic[j] < nonbasic[enter]:
                    enter = j
            if enter is None:
                break
            leave, best = None, None
            for i, row in enumerate(rows):
                a = row[enter]
                if a > 0:
                    ratio = rhs[i] / a
                    if best is None or ratio < best or (ratio == best and basic[i] < basic[leave]):
                        leave, best = i, ratio
            if leave is None:
                raise Unbounded("objective is unbounded")
            _pivot(rows, rhs, costs, z, leave, enter)
            basic[leave], nonbasic[enter] = nonbasic[enter], basic[leave]
        frozen.update(j for j in range(n) if cost[j] < 0)

    x = [Fraction(0)] * n
    for i, var in enumerate(basic):
        if var < n:
            x[var] = rhs[i]
    return x, z


def _pivot(rows, rhs, costs, z, i, j):
    prow = rows[i]
    a = prow[j]
    inv = 1 / a
    new = [v * inv for v in prow]
    new[j] = inv
    rows[i] = new
    rhs[i] *= inv
    r_i = rhs[i]
    width = len(new)
    for r, row in enumerate(rows):
        if r == i:
            continue
        f = row[j]
        if not f:
            continue
        for k in range(width):
            if k != j and new[k]:
                row[k] -= f * new[k]
        row[j] = -f * inv
        rhs[r] -= f * r_i
    for level, cost in enumerate(costs):
        f = cost[j]
        if not f:
            continue
        for k in range(width):
            if k != j and new[k]:
                cost[k] -= f * new[k]
        cost[j] = -f * inv
        z[level] += f * r_i
