"""Exact-rational valuation oracles over integer item ids.

Every valuation is a callable ``v(items) -> Fraction`` with ``v(frozenset()) == 0``.
Item ids are global to an instance; a valuation ignores nothing and never
re-indexes, so sub-instances can share valuation objects.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from ._subsets import anchored_submask_pairs, from_mask
from .errors import CapExceeded, InvalidValuation, MissingTableEntry

EXHAUSTIVE_CAP = 14


def as_fraction(x):
    """Parse an int, Fraction or ``"p/q"`` string into a Fraction (floats rejected)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise InvalidValuation(f"values must be exact rationals, got {x!r}")
    if isinstance(x, (int, str)):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidValuation(f"cannot parse rational {x!r}") from exc
    raise InvalidValuation(f"cannot parse rational {x!r}")


def fraction_str(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _nonneg(values, what):
    if isinstance(values, dict):
        raise InvalidValuation(f"{what} must be a sequence indexed by item id")
    out = [as_fraction(w) for w in values]
    if any(w < 0 for w in out):
        raise InvalidValuation(f"{what} must be non-negative")
    return tuple(out)


class Valuation:
    """Base class: subclasses implement ``_eval`` on a frozenset of item ids."""

    kind = "abstract"

    def __call__(self, items):
        items = items if isinstance(items, frozenset) else frozenset(items)
        if not items:
            return Fraction(0)
        return self._eval(items)

    def _eval(self, items):
        raise NotImplementedError

    def value_table(self, order):
        """Values of every subset of ``order`` indexed by bitmask (cached)."""
        order = tuple(order)
        cache = self.__dict__.setdefault("_table_cache", {})
        table = cache.get(order)
        if table is None:
            table = [self(from_mask(mask, order)) for mask in range(1 << len(order))]
            cache[order] = table
        return table

    def to_json(self):
        raise NotImplementedError


@dataclass(eq=False)
class Additive(Valuation):
    weights: tuple
    kind = "additive"

    def __post_init__(self):
        self.weights = _nonneg(self.weights, "weights")

    def _eval(self, items):
        return sum((self.weights[b] for b in items), Fraction(0))

    def to_json(self):
        return {"kind": "additive", "weights": [fraction_str(w) for w in self.weights]}


@dataclass(eq=False)
class UnitDemand(Valuation):
    weights: tuple
    kind = "unit_demand"

    def __post_init__(self):
        self.weights = _nonneg(self.weights, "weights")

    def _eval(self, items):
        return max(self.weights[b] for b in items)

    def to_json(self):
        return {"kind": "unit_demand", "weights": [fraction_str(w) for w in self.weights]}


@dataclass(eq=False)
class BudgetAdditive(Valuation):
    weights: tuple
    cap: Fraction
    kind = "budget_additive"

    def __post_init__(self):
        self.weights = _nonneg(self.weights, "weights")
        self.cap = as_fraction(self.cap)
        if self.cap < 0:
            raise InvalidValuation("budget cap must be non-negative")

    def _eval(self, items):
        return min(self.cap, sum((self.weights[b] for b in items), Fraction(0)))

    def to_json(self):
        return {"kind": "budget_additive",
                "weights": [fraction_str(w) for w in self.weights],
                "cap": fraction_str(self.cap)}


@dataclass(eq=False)
class Coverage(Valuation):
    """Weight of the universe elements covered by the union of item cover sets."""

    universe_weights: tuple
    covers: tuple
    kind = "coverage"

    def __post_init__(self):
        self.universe_weights = _nonneg(self.universe_weights, "universe weights")
        self.covers = tuple(frozenset(int(e) for e in c) for c in self.covers)
        size = len(self.universe_weights)
        for c in self.covers:
            if any(not 0 <= e < size for e in c):
                raise InvalidValuation("cover set references an unknown universe element")

    def _eval(self, items):
        covered = frozenset().union(*(self.covers[b] for b in items))
        return sum((self.universe_weights[e] for e in covered), Fraction(0))

    def to_json(self):
        return {"kind": "coverage",
                "universe_weights": [fraction_str(w) for w in self.universe_weights],
                "covers": [sorted(c) for c in self.covers]}


@dataclass(eq=False)
class XOS(Valuation):
    """Maximum over clauses of an additive function; each clause is a weight row."""

    clauses: tuple
    kind = "xos"

    def __post_init__(self):
        if not self.clauses:
            raise InvalidValuation("xos valuation needs at least one clause")
        self.clauses = tuple(_nonneg(row, "clause weights") for row in self.clauses)

    def _eval(self, items):
        return max(sum((row[b] for b in items), Fraction(0)) for row in self.clauses)

    def to_json(self):
        return {"kind": "xos",
                "clauses": [[fraction_str(w) for w in row] for row in self.clauses]}


@dataclass(eq=False)
class Table(Valuation):
    """Explicit value table; validated exhaustively when ``m`` is within the cap."""

    values: dict
    m: int = None
    check: bool = True
    kind = "table"

    def __post_init__(self):
        table = {}
        for key, val in self.values.items():
            table[frozenset(int(b) for b in key)] = as_fraction(val)
        if table.get(frozenset(), Fraction(0)) != 0:
            raise InvalidValuation("table valuation must map the empty set to 0")
        table[frozenset()] = Fraction(0)
        if any(v < 0 for v in table.values()):
            raise InvalidValuation("table values must be non-negative")
        if self.m is None:
            self.m = 1 + max((b for key in table for b in key), default=-1)
        self.values = table
        if self.check and self.m <= EXHAUSTIVE_CAP:
            report = check_monotone_subadditive(self, self.m)
            if not (report.monotone and report.subadditive):
                raise InvalidValuation(f"table valuation rejected: {report}")

    def _eval(self, items):
        try:
            return self.values[items]
        except KeyError:
            raise MissingTableEntry(f"no table entry for {sorted(items)}") from None

    def to_json(self):
        rows = sorted(self.values.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        return {"kind": "table",
                "values": [[",".join(str(b) for b in sorted(k)), fraction_str(v)]
                           for k, v in rows]}


@dataclass(eq=False)
class Scaled(Valuation):
    """``scale * base``; used to normalize maximin shares to 1."""

    base: Valuation
    scale: Fraction

    def __post_init__(self):
        self.scale = as_fraction(self.scale)
        if isinstance(self.base, Scaled):
            self.scale *= self.base.scale
            self.base = self.base.base

    @property
    def kind(self):
        return self.base.kind

    def _eval(self, items):
        return self.scale * self.base(items)

    def to_json(self):
        out = dict(self.base.to_json())
        out["scale"] = fraction_str(self.scale)
        return out


def scaled(v, scale):
    scale = as_fraction(scale)
    return v if scale == 1 else Scaled(v, scale)


_KINDS = {
    "additive": lambda d: Additive(d["weights"]),
    "unit_demand": lambda d: UnitDemand(d["weights"]),
    "budget_additive": lambda d: BudgetAdditive(d["weights"], d["cap"]),
    "coverage": lambda d: Coverage(d["universe_weights"], d["covers"]),
    "xos": lambda d: XOS(d["clauses"]),
    "table": lambda d: Table({_parse_key(k): v for k, v in _rows(d["values"])}),
}


def _rows(values):
    return values.items() if isinstance(values, dict) else values


def _parse_key(key):
    key = str(key).strip()
    return frozenset(int(b) for b in key.split(",") if b.strip()) if key else frozenset()


def valuation_from_json(d):
    try:
        kind = d["kind"].replace("-", "_")
        v = _KINDS[kind](d)
    except KeyError as exc:
        raise InvalidValuation(f"bad valuation record {d!r}: missing {exc}") from exc
    if "scale" in d:
        v = scaled(v, d["scale"])
    return v


@dataclass
class SubadditivityReport:
    monotone: bool
    subadditive: bool
    counterexample: tuple = field(default=None)

    def __bool__(self):
        return self.monotone and self.subadditive


def integer_table(values):
    """Scale Fractions to a common denominator; returns (numpy array, denominator)."""
    den = lcm(*(v.denominator for v in values)) if values else 1
    ints = [v.numerator * (den // v.denominator) for v in values]
    if max(ints, default=0) < 2 ** 61:
        return np.asarray(ints, dtype=np.int64), den
    return np.asarray(ints, dtype=object), den


def check_monotone_subadditive(v, m, cap=EXHAUSTIVE_CAP):
    """Exhaustively test monotonicity and subadditivity of ``v`` on items ``0..m-1``.

    Monotonicity is checked on single-item extensions.  Subadditivity is checked
    on all disjoint pairs, which is equivalent to the general condition once
    monotonicity holds.  The first violating pair is returned as the
    counterexample.
    """
    if m > cap:
        raise CapExceeded(f"exhaustive check needs m <= {cap}, got {m}")
    order = tuple(range(m))
    vals, _ = integer_table(v.value_table(order))
    masks = np.arange(1 << m, dtype=np.int64)
    for i in range(m):
        lacking = masks[(masks >> i & 1) == 0]
        bad = vals[lacking] > vals[lacking | (1 << i)]
        if bad.any():
            s = int(lacking[np.argmax(bad)])
            return SubadditivityReport(False, _subadditive(vals, m, order)[0],
                                       (from_mask(s, order), from_mask(s | 1 << i, order)))
    ok, witness = _subadditive(vals, m, order)
    return SubadditivityReport(True, ok, witness)


def _subadditive(vals, m, order):
    s, t, _ = anchored_submask_pairs(m)
    rest = s ^ t
    bad = vals[t] + vals[rest] < vals[s]
    if not bad.any():
        return True, None
    j = int(np.argmax(bad))
    pair = sorted([from_mask(int(t[j]), order), from_mask(int(rest[j]), order)],
                  key=lambda x: sorted(x))
    return False, tuple(pair)
