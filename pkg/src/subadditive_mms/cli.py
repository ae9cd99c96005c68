"""Command line entry point: ``python -m subadditive_mms <command> ...``.

Exit codes: 0 success, 2 invariant violation, 3 retries/restarts exhausted
or a stand-in missed its quota, 4 input error.
"""
import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import concentration as conc
from .additive_fit import fit_additive_lower, fit_ratio, ratio_floor
from .converter import convert_multiallocation
from .core import load_instance, multiplicity, normalize_to_unit_mms, verify_allocation
from .errors import InputError, InvariantViolation, RetriesExhausted, StandInFailed
from .guiding import build_labelling, estimate_success, girth, red_edge_report
from .mms import certify_beta_mms, mms_profile
from .partial import (GuidingParams, disjoint_partials, guided_graph, partial_half_guided,
                      partial_quarter)
from .pipelines import PIPELINES, guarantee_report
from .valuations import fraction_str


def _plain(x):
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _int_list(text):
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


def _load_bundles(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read bundles from {path}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("bundles", data.get("allocation"))
    if not isinstance(data, list):
        raise InputError("bundle file must hold a list of item lists")
    return [frozenset(int(b) for b in bundle) for bundle in data]


def _instance(args):
    try:
        return load_instance(args.instance)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read instance {args.instance}: {exc}") from exc


def cmd_mms(args):
    inst = _instance(args)
    prof = mms_profile(inst)
    agents = range(inst.n) if args.agent is None else [args.agent]
    return {"agents": [{"agent": i, "mms": prof[i].value,
                        "witness": [sorted(b) for b in prof[i].witness]} for i in agents]}


def cmd_fit_lp(args):
    inst = _instance(args)
    v = inst.valuations[args.agent]
    items = _int_list(args.items)
    x = frozenset(inst.items if items is None else items)
    fit = fit_additive_lower(v, x)
    out = {"agent": args.agent, "items": sorted(x), "weights": {b: fit.weights[b] for b in sorted(x)},
           "total": fit.total, "value": v(x), "ratio": fit_ratio(fit, v)}
    if len(x) >= 2:
        out["ratio_floor"] = ratio_floor(len(x))
    return out


def cmd_convert(args):
    inst = _instance(args)
    ma = _load_bundles(args.multialloc)
    if len(ma) != inst.n:
        raise InputError("need one bundle per agent")
    conv = convert_multiallocation(inst, ma, tau=args.tau, max_retries=args.max_retries,
                                   rng=args.seed, pair_cap=args.pair_cap,
                                   tau_scale=Fraction(args.tau_scale))
    return {"seed": args.seed, "alpha": conv.alpha, "tau": conv.classes.tau,
            "easy": sorted(conv.classes.easy), "hard": sorted(conv.classes.hard),
            "attempts": conv.attempts, "merge": conv.trace,
            "allocation": [sorted(b) for b in conv.allocation],
            "disjoint": verify_allocation(conv.allocation)}


def cmd_partial(args):
    inst, _ = normalize_to_unit_mms(_instance(args))
    q = _int_list(args.agents) or list(range(inst.n))
    if args.mode == "quarter":
        pa = partial_quarter(inst, q)
    elif args.mode == "disjoint":
        fam = disjoint_partials(inst, q)
        return {"k": fam.k, "copies": fam.copies, "q_prime": list(fam.q_prime),
                "rounds": [{i: sorted(b) for i, b in rnd.items()} for rnd in fam.rounds],
                "served_copies": fam.served_copies}
    else:
        params = GuidingParams(lift_rounds=args.lift_rounds, trials=args.trials, seed=args.seed)
        pa = partial_half_guided(inst, q, params, args.seed)
    return {"seed": args.seed, "mode": args.mode, "floor": pa.floor, "quota": pa.quota,
            "served": list(pa.served), "strategy": pa.strategy,
            "bundles": {i: sorted(b) for i, b in pa.bundles.items()}}


def cmd_guide(args):
    inst, _ = normalize_to_unit_mms(_instance(args))
    q = _int_list(args.agents) or list(range(inst.n))
    k = inst.n // len(q)
    rng = np.random.default_rng(args.seed)
    g = guided_graph(len(q), k, GuidingParams(lift_rounds=args.lift_rounds))
    prof = mms_profile(inst)
    bundles = [[b for b in prof[i].witness if b] for i in q]
    lab = build_labelling(g, bundles, sorted(inst.items), rng)
    vals = [inst.valuations[i] for i in q]
    checked, bad, _ = red_edge_report(g, lab, vals)
    return {"seed": args.seed, "k": k, "q": q, "seeds": g.n_seeds, "alloc_nodes": g.n_alloc,
            "edges": g.n_edges, "girth": girth(g) if g.n_edges <= 200_000 else None,
            "tree_fraction": lab.stats["tree_fraction"],
            "success": estimate_success(g, lab, vals, args.trials, rng),
            "target": k / (k + 1), "red_edge_nodes_checked": checked,
            "red_edge_violations": len(bad)}


def cmd_concentration(args):
    inst = _instance(args)
    f = inst.valuations[args.agent]
    ground = sorted(inst.items)
    p = Fraction(args.p)
    spec = conc.SamplingSpec(p, args.n_hat, args.trials, args.seed)
    exp = conc.check_expectation_bound(f, ground, p, args.trials, args.seed)
    rep = conc.check_concentration(f, ground, spec)
    return {"seed": args.seed, "trials": args.trials,
            "expectation": {"mean": exp.mean, "half_width": exp.half_width, "bound": exp.bound,
                            "passed": exp.passed, "exact": exp.exact},
            "concentration": {"status": rep.status, "threshold": rep.threshold,
                              "target": rep.target, "frequency": rep.frequency,
                              "sigma": rep.sigma, "passed": rep.passed,
                              "violating_set": rep.violating_set}}


def cmd_solve(args):
    inst = _instance(args)
    alloc, report = PIPELINES[args.pipeline](inst, seed=args.seed)
    out = report.to_json()
    out["allocation"] = [sorted(b) for b in alloc]
    return out


def cmd_verify(args):
    inst = _instance(args)
    bundles = _load_bundles(args.allocation)
    if len(bundles) != inst.n:
        raise InputError("need one bundle per agent")
    out = {"disjoint": verify_allocation(bundles), "multiplicity": multiplicity(bundles)}
    out.update(guarantee_report(inst, bundles))
    if args.beta is not None:
        cert = certify_beta_mms(inst, bundles, Fraction(args.beta))
        out["beta"] = cert.beta
        out["certified"] = bool(cert) and out["disjoint"]
        out["violations"] = [list(v) for v in cert.violations]
    return out


def _text(data, indent=0):
    lines = []
    pad = "  " * indent
    for key, val in data.items():
        if isinstance(val, dict) and val:
            lines.append(f"{pad}{key}:")
            lines.extend(_text(val, indent + 1))
        else:
            lines.append(f"{pad}{key}: {json.dumps(val)}")
    return lines


def build_parser():
    parser = argparse.ArgumentParser(prog="subadditive_mms",
                                     description="Maximin-share allocation toolkit.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=["json", "text"], default="json")
    parser.add_argument("--trials", type=int, default=10_000)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mms", help="exact maximin shares and witnesses")
    p.add_argument("instance")
    p.add_argument("--agent", type=int)
    p.set_defaults(func=cmd_mms)

    p = sub.add_parser("fit-lp", help="largest additive underestimate on a set")
    p.add_argument("instance")
    p.add_argument("--agent", type=int, default=0)
    p.add_argument("--items", help="comma-separated item ids (default: all)")
    p.set_defaults(func=cmd_fit_lp)

    p = sub.add_parser("convert", help="multiallocation to disjoint allocation")
    p.add_argument("instance")
    p.add_argument("multialloc", help="JSON list of bundles, one per agent")
    p.add_argument("--tau", type=int)
    p.add_argument("--tau-scale", default="1")
    p.add_argument("--max-retries", type=int, default=1000)
    p.add_argument("--pair-cap", type=int, default=20)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("partial", help="partial allocation engines")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["quarter", "disjoint", "half-guided"], default="quarter")
    p.add_argument("--agents", help="comma-separated agent ids (default: all)")
    p.add_argument("--lift-rounds", type=int, default=1)
    p.set_defaults(func=cmd_partial)

    p = sub.add_parser("guide", help="guiding-graph statistics")
    p.add_argument("instance")
    p.add_argument("--agents")
    p.add_argument("--lift-rounds", type=int, default=1)
    p.set_defaults(func=cmd_guide)

    p = sub.add_parser("concentration", help="sampling expectation and concentration checks")
    p.add_argument("instance")
    p.add_argument("--agent", type=int, default=0)
    p.add_argument("--p", default="1/2")
    p.add_argument("--n-hat", type=int, default=4)
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("solve", help="run an end-to-end pipeline")
    p.add_argument("instance")
    p.add_argument("--pipeline", choices=sorted(PIPELINES), default="main")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check an allocation")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--beta")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        data = _plain(args.func(args))
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (RetriesExhausted, StandInFailed) as exc:
        print(f"search exhausted (seed {args.seed}): {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError, IndexError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    if args.format == "json":
        print(json.dumps(data, indent=2))
    else:
        print("\n".join(_text(data)))
    return 0
