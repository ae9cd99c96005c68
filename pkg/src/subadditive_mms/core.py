"""Instances, (multi)allocations and the structural verifiers used everywhere."""
import json
from collections import Counter
from fractions import Fraction

from .errors import InputError, ZeroMMS
from .valuations import Valuation, fraction_str, scaled, valuation_from_json


class Instance:
    """``n`` agents with valuation oracles over items ``0..m-1``.

    ``items`` is the active ground set (defaults to all items); sub-instances
    produced by reductions keep global item ids and shrink ``items`` instead.
    ``agents`` carries the original agent labels so reductions can report
    assignments in terms of the input.  Instances are never mutated after
    construction.
    """

    def __init__(self, valuations, m, items=None, agents=None):
        self.valuations = tuple(valuations)
        if not all(isinstance(v, Valuation) for v in self.valuations):
            raise InputError("every agent needs a Valuation")
        if m < 0:
            raise InputError("m must be non-negative")
        self.m = int(m)
        self.items = frozenset(range(self.m)) if items is None else frozenset(items)
        if any(not 0 <= b < self.m for b in self.items):
            raise InputError("active items must lie in [0, m)")
        self.agents = tuple(range(len(self.valuations))) if agents is None else tuple(agents)
        if len(self.agents) != len(self.valuations):
            raise InputError("agents and valuations differ in length")

    @property
    def n(self):
        return len(self.valuations)

    def value(self, agent, bundle):
        return self.valuations[agent](bundle)

    def with_valuations(self, valuations):
        return Instance(valuations, self.m, self.items, self.agents)

    def __repr__(self):
        return f"Instance(n={self.n}, m={self.m}, items={len(self.items)})"

    def to_json(self):
        out = {"n": self.n, "m": self.m, "valuations": [v.to_json() for v in self.valuations]}
        if self.items != frozenset(range(self.m)):
            out["items"] = sorted(self.items)
        return out


def instance_from_json(data):
    if isinstance(data, str):
        data = json.loads(data)
    try:
        vals = [valuation_from_json(d) for d in data["valuations"]]
        m = int(data["m"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed instance: {exc}") from exc
    if "n" in data and int(data["n"]) != len(vals):
        raise InputError("n does not match the number of valuations")
    return Instance(vals, m, data.get("items"))


def load_instance(path):
    with open(path) as fh:
        return instance_from_json(json.load(fh))


def bundles_to_json(bundles):
    return [sorted(b) for b in bundles]


def as_bundles(bundles):
    return tuple(frozenset(b) for b in bundles)


def multiplicity(bundles):
    """Largest number of bundles sharing one item (0 if all bundles are empty)."""
    counts = Counter(b for bundle in bundles for b in bundle)
    return max(counts.values(), default=0)


def verify_allocation(bundles):
    """True iff the bundles are pairwise disjoint."""
    seen = set()
    for bundle in bundles:
        if seen.intersection(bundle):
            return False
        seen.update(bundle)
    return True


def normalize_to_unit_mms(inst):
    """Rescale every valuation so its n-bundle maximin share is exactly 1.

    Returns ``(normalized_instance, scales)``; ``scales[i]`` multiplies agent
    ``i``'s original valuation.
    """
    from .mms import mms_profile

    profile = mms_profile(inst)
    scales = []
    for i, entry in enumerate(profile):
        if entry.value == 0:
            raise ZeroMMS(f"agent {inst.agents[i]} has maximin share 0")
        scales.append(Fraction(1) / entry.value)
    normalized = inst.with_valuations(scaled(v, s) for v, s in zip(inst.valuations, scales))
    from .mms import MMSEntry, _seed_profile

    _seed_profile(normalized, [MMSEntry(Fraction(1), e.witness) for e in profile])
    return normalized, scales


def format_fraction(x):
    return fraction_str(x)
