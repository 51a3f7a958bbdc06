#!/usr/bin/env python3
"""Run the demo cohort end-to-end and print a digest of the results.

Equivalent to `headway pipeline --config configs/demo.json` plus a short
human-readable report: cluster geometry, classifier quality, fixed-point
fidelity and the per-driver setpoints.
"""

import argparse
import json
import sys
from pathlib import Path

from headway.cli import main as headway_main

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(REPO / "configs" / "demo.json"))
    ap.add_argument("--out-dir", default="artifacts")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    argv = ["pipeline", "--config", args.config, "--out-dir", args.out_dir]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    rc = headway_main(argv)
    if rc != 0:
        return rc

    with open(Path(args.out_dir) / "summary.json") as fh:
        summary = json.load(fh)

    print()
    print("=" * 60)
    print(f"config hash   {summary['config_hash'][:16]}…  seed {summary['seed']}")
    print(
        f"cohort        {summary['n_trips']} trips -> {summary['n_segments']} segments "
        f"({summary['segment_duration_mean_s']:.1f} s mean)"
    )
    print(f"cluster sizes {summary['cluster_sizes']}")
    recalls = ", ".join(f"{r:.3f}" for r in summary["per_class_recall"])
    print(f"classifier    accuracy {summary['overall_accuracy']:.4f}  recall [{recalls}]")
    print(
        f"hardware      max|dy| {summary['hw_max_abs_dy']:.2e}  "
        f"argmax agreement {summary['hw_argmax_agreement']:.4f}  "
        f"{summary['hw_cycles_total']} cycles/inference"
    )
    print("setpoints")
    for sp in summary["setpoints"]:
        print(f"  {sp['driver']:<12} style {sp['style']}  thw {sp['thw_s']:.3f} s")
    print("=" * 60)
    return 0


if __name__ == "__main__":
    sys.exit(main())
