"""End-to-end allocation pipelines built from the partial engines and the converter.

Each pipeline normalizes the instance (every maximin share becomes 1), runs
rounds of a partial-allocation engine on the agents still unserved, keeps
each served agent's bundle as one layer of a multiallocation, and converts
that multiallocation into a disjoint allocation.  Reports carry exact
ratios plus the asymptotic guarantee formulas evaluated at the instance size
(they are far below anything checkable at this scale and are report-only).
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, floor, log, log2, sqrt

import numpy as np

from .converter import convert_multiallocation
from .core import multiplicity, normalize_to_unit_mms, verify_allocation
from .errors import CapExceeded, InvariantViolation, RestartsExhausted
from .mms import big_item_reduction, mms_profile
from .partial import GuidingParams, disjoint_partials, partial_half_guided, partial_quarter
from .valuations import fraction_str

MAX_RESTARTS = 1000
DIRECT_CAP = 1 << 20


def warmup2_threshold(m):
    """Item-multiplicity limit ``ceil(18 sqrt(log_{6/5} m))`` for the bundle picks."""
    if m < 2:
        return 0
    return ceil(18 * sqrt(log(m) / log(Fraction(6, 5))))


def warmup1_round_bound(n):
    return ceil(log(n) / log(1.5)) + 2 if n > 1 else 1


def warmup2_round_bound(n):
    return ceil(log(n) / log(1.2)) + 2 if n > 1 else 1


def main_round_bound(n):
    return ceil(log2(log2(n))) + 2 if n >= 4 else 2


def _loglog(n):
    return log2(log2(n)) if n > 2 else 0.0


def reduction_beta(alpha, eta, n):
    """``1 / (10800 alpha eta (log2 alpha + log2 log2 n))`` (``log2 log2 n`` taken as 0 for n <= 2)."""
    denom = 10800 * alpha * eta * Fraction(log2(alpha) + _loglog(n))
    if denom <= 0:
        return Fraction(1)
    return 1 / denom


def headline_bound(pipeline, n, m):
    """The asymptotic ratio denominators evaluated at ``n``, ``m`` (None where undefined)."""
    if pipeline == "warmup1":
        return 648000 * log2(n) * _loglog(n) if n > 2 else None
    if pipeline == "warmup2":
        return 12441600 * sqrt(log2(m)) * _loglog(m) if m > 2 else None
    if pipeline == "main":
        return 432000 * _loglog(n) ** 2 if n > 2 else None
    raise ValueError(pipeline)


@dataclass
class PipelineReport:
    pipeline: str
    seed: object
    rounds: int
    alpha: int
    layers: list  # per round: {agent: bundle}
    values: list
    mms: list
    ratios: list
    min_ratio: Fraction
    constants: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json(self):
        def fr(x):
            return None if x is None else fraction_str(x)
        return {
            "pipeline": self.pipeline,
            "seed": self.seed,
            "rounds": self.rounds,
            "alpha": self.alpha,
            "layers": [{str(i): sorted(b) for i, b in sorted(layer.items())}
                       for layer in self.layers],
            "values": [fr(v) for v in self.values],
            "mms": [fr(v) for v in self.mms],
            "ratios": [fr(v) for v in self.ratios],
            "min_ratio": fr(self.min_ratio),
            "constants": {k: (fr(v) if isinstance(v, Fraction) else v)
                          for k, v in sorted(self.constants.items())},
            "extra": _jsonable(self.extra),
        }


def _jsonable(x):
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def guarantee_report(inst, alloc, profile=None):
    """Exact per-agent values, maximin shares and ratios (``None`` where the share is 0)."""
    profile = mms_profile(inst) if profile is None else profile
    values, shares, ratios = [], [], []
    for i, v in enumerate(inst.valuations):
        bundle = alloc[i] if i < len(alloc) else frozenset()
        val, share = v(bundle), profile[i].value
        values.append(val)
        shares.append(share)
        ratios.append(val / share if share else None)
    known = [r for r in ratios if r is not None]
    return {"values": values, "mms": shares, "ratios": ratios,
            "min_ratio": min(known) if known else Fraction(1)}


def _finish(name, inst, seed, alloc, layers, constants, extra, profile=None, rounds=None):
    if not verify_allocation(alloc):
        raise InvariantViolation(f"{name} produced overlapping bundles")
    g = guarantee_report(inst, alloc, profile)
    alpha = multiplicity([b for layer in layers for b in layer.values()]) if layers else 0
    constants.setdefault("headline", headline_bound(name, inst.n, len(inst.items)))
    rounds = len(layers) if rounds is None else rounds
    return tuple(alloc), PipelineReport(name, seed, rounds, alpha, layers, g["values"],
                                        g["mms"], g["ratios"], g["min_ratio"], constants, extra)


def direct_search(inst, profile=None, cap=DIRECT_CAP):
    """Assignment of every item maximizing the minimum ratio, by enumeration."""
    profile = mms_profile(inst) if profile is None else profile
    items = sorted(inst.items)
    n = inst.n
    if n ** len(items) > cap:
        raise CapExceeded(f"direct search over {n}^{len(items)} assignments exceeds {cap}")
    best, best_key = None, None
    for assign in product(range(n), repeat=len(items)):
        bundles = [set() for _ in range(n)]
        for b, i in zip(items, assign):
            bundles[i].add(b)
        ratios = [inst.valuations[i](bundles[i]) / profile[i].value
                  for i in range(n) if profile[i].value]
        key = min(ratios, default=Fraction(1))
        if best_key is None or key > best_key:
            best, best_key = bundles, key
    return tuple(frozenset(b) for b in best)


def _trivial(inst):
    """One item per agent when there are at most as many items as agents."""
    items = sorted(inst.items)
    return tuple(frozenset([items[i]]) if i < len(items) else frozenset() for i in range(inst.n))


def _convert(norm, ma, eta, rng, constants, max_retries):
    alloc, info = reduction_wrapper(norm, ma, eta, rng, max_retries)
    constants["beta"] = info.get("beta")
    constants["fixed_items"] = len(info.get("fixed", ()))
    for key in ("tau", "converter_attempts", "hard_agents"):
        if key in info:
            constants[key] = info[key]
    return alloc


def _as_multiallocation(n, layers):
    ma = [frozenset() for _ in range(n)]
    for layer in layers:
        for i, b in layer.items():
            ma[i] = b
    return tuple(ma)


def warmup1(inst, seed=0, max_retries=1000):
    """Repeated quarter allocations on the unserved agents, then conversion."""
    rng = np.random.default_rng(seed)
    norm, _ = normalize_to_unit_mms(inst)
    profile = mms_profile(norm)
    unserved, layers = set(range(norm.n)), []
    while unserved:
        pa = partial_quarter(norm, unserved, profile)
        if not pa.served:
            raise InvariantViolation("quarter round served nobody")
        layers.append(dict(pa.bundles))
        unserved -= set(pa.served)
    bound = warmup1_round_bound(norm.n)
    if len(layers) > bound:
        raise InvariantViolation(f"{len(layers)} rounds exceed the bound {bound}")
    ma = _as_multiallocation(norm.n, layers)
    constants = {"eta": 4, "floor": Fraction(1, 4), "round_bound": bound}
    alloc = _convert(norm, ma, 4, rng, constants, max_retries)
    return _finish("warmup1", inst, seed, alloc, layers, constants, {})


def warmup2(inst, seed=0, max_retries=1000, max_restarts=MAX_RESTARTS):
    """Disjoint families of quarter allocations, one random pick per agent, then conversion."""
    rng = np.random.default_rng(seed)
    norm, _ = normalize_to_unit_mms(inst)
    profile = mms_profile(norm)
    unserved, menus, rounds = set(range(norm.n)), {}, 0
    while unserved:
        fam = disjoint_partials(norm, unserved, profile)
        if not fam.q_prime:
            raise InvariantViolation("disjoint family served nobody")
        rounds += 1
        for i in fam.q_prime:
            menus[i] = [rnd[i] for rnd in fam.rounds]
        unserved -= set(fam.q_prime)
    bound = warmup2_round_bound(norm.n)
    if rounds > bound:
        raise InvariantViolation(f"{rounds} rounds exceed the bound {bound}")
    limit = warmup2_threshold(len(norm.items))
    for restart in range(max_restarts):
        picks = {i: int(rng.integers(len(menus[i]))) for i in sorted(menus)}
        ma = tuple(menus[i][picks[i]] for i in range(norm.n))
        if multiplicity(ma) <= limit:
            break
    else:
        raise RestartsExhausted(f"multiplicity above {limit} after {max_restarts} re-draws")
    constants = {"eta": 4, "floor": Fraction(1, 4), "round_bound": bound,
                 "multiplicity_limit": limit, "restarts": restart}
    alloc = _convert(norm, ma, 4, rng, constants, max_retries)
    extra = {"family_rounds": rounds, "menu_sizes": {i: len(menus[i]) for i in sorted(menus)}}
    return _finish("warmup2", inst, seed, alloc, [dict(enumerate(ma))], constants, extra,
                   rounds=rounds)


def main_pipeline(inst, seed=0, params=None, max_retries=1000):
    """Guided half-value rounds on the unserved agents, then conversion.

    With at most as many items as agents each agent gets one item; with one or
    two agents the best assignment is found by enumeration.
    """
    rng = np.random.default_rng(seed)
    params = GuidingParams(seed=seed) if params is None else params
    profile = mms_profile(inst)
    if len(inst.items) <= inst.n:
        alloc = _trivial(inst)
        return _finish("main", inst, seed, alloc, [], {"case": "m<=n"}, {}, profile)
    if inst.n <= 2:
        alloc = direct_search(inst, profile)
        return _finish("main", inst, seed, alloc, [], {"case": "n<=2"}, {}, profile)

    norm, _ = normalize_to_unit_mms(inst)
    nprof = mms_profile(norm)
    n = norm.n
    unserved, layers, coverage, growth = set(range(n)), [], [], []
    while unserved:
        r = Fraction(n, len(unserved))
        pa = partial_half_guided(norm, unserved, params, rng, nprof, n_ambient=n)
        coverage.append(r)
        layers.append(dict(pa.bundles))
        unserved -= set(pa.served)
        if unserved:
            nxt = Fraction(n, len(unserved))
            proven = nxt >= r * (floor(r) + 1)
            growth.append({"r": r, "next": nxt, "floor_bound": proven,
                           "real_bound": nxt >= r * (r + 1)})
            if not proven:
                raise InvariantViolation(f"coverage {nxt} below {r} * ({floor(r)} + 1)")
    bound = main_round_bound(n)
    if len(layers) > bound:
        raise InvariantViolation(f"{len(layers)} rounds exceed the bound {bound}")
    ma = _as_multiallocation(n, layers)
    constants = {"eta": 2, "floor": Fraction(1, 2), "round_bound": bound, "case": "rounds"}
    alloc = _convert(norm, ma, 2, rng, constants, max_retries)
    return _finish("main", inst, seed, alloc, layers, constants,
                   {"coverage": coverage, "growth": growth}, profile)


def reduction_wrapper(inst, ma, eta, seed=0, max_retries=1000):
    """Big-item reduction at the threshold ``beta(alpha, eta, n)`` followed by conversion.

    ``inst`` must be normalized; ``seed`` may be an int or a numpy Generator.
    Returns ``(allocation, info)``.
    """
    rng = np.random.default_rng(seed)
    ma = tuple(frozenset(b) for b in ma)
    alpha = multiplicity(ma)
    info = {"alpha": alpha, "eta": eta}
    if alpha <= 1:
        info["case"] = "bypass"
        info.update(guarantee_report(inst, ma))
        return ma, info
    beta = reduction_beta(alpha, eta, inst.n)
    info["beta"] = beta
    residual, fixed = big_item_reduction(inst, beta)
    info["fixed"] = fixed
    final = [frozenset() for _ in range(inst.n)]
    for label, b in fixed:
        final[inst.agents.index(label)] = frozenset([b])
    if residual.n:
        rest = [ma[inst.agents.index(label)] & residual.items for label in residual.agents]
        conv = convert_multiallocation(residual, rest, rng=rng, max_retries=max_retries)
        for label, bundle in zip(residual.agents, conv.allocation):
            final[inst.agents.index(label)] = bundle
        info["tau"] = conv.classes.tau
        info["converter_attempts"] = conv.attempts
        info["hard_agents"] = len(conv.classes.hard)
    if not verify_allocation(final):
        raise InvariantViolation("reduction wrapper produced overlapping bundles")
    info.update(guarantee_report(inst, final))
    return tuple(final), info


PIPELINES = {"warmup1": warmup1, "warmup2": warmup2, "main": main_pipeline}
