"""Run the three allocation pipelines on a small mixed instance and compare ratios.

    python3 demos/pipelines_tour.py [seed]
"""
import sys
from pathlib import Path

from subadditive_mms.core import load_instance
from subadditive_mms.mms import mms_profile
from subadditive_mms.pipelines import PIPELINES


def main(seed=0):
    inst = load_instance(Path(__file__).parent / "data" / "mixed.json")
    prof = mms_profile(inst)
    print(f"{inst.n} agents, {len(inst.items)} items")
    for i, e in enumerate(prof):
        print(f"  agent {i}: MMS {e.value}, witness {[sorted(b) for b in e.witness]}")
    for name, run in PIPELINES.items():
        alloc, rep = run(inst, seed=seed)
        ratios = ", ".join(str(r) for r in rep.ratios)
        print(f"{name:8s} rounds={rep.rounds} alpha={rep.alpha} min ratio={rep.min_ratio} "
              f"({float(rep.min_ratio):.3f})")
        print(f"         bundles {[sorted(b) for b in alloc]}")
        print(f"         ratios  {ratios}")
        head = rep.constants.get("headline")
        if head:
            print(f"         asymptotic denominator at this size: {head:.3g}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
