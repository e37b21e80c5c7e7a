#!/usr/bin/env python3
"""Generate a synthetic study, run the full pipeline with the built-in mock
predictor, and print the per-condition CCC table."""

import argparse
import json
import time
from pathlib import Path

from affectbench.harness import ingest, run_all
from affectbench.manifest import load_manifest
from affectbench.synthetic import write_synthetic_study


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("root", type=Path, help="working directory for the study")
    parser.add_argument("--participants", type=int, default=3)
    parser.add_argument("--frames", type=int, default=208)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args()

    manifest_path = write_synthetic_study(
        args.root,
        participants=args.participants,
        frames_per_participant=args.frames,
        seed=args.seed,
    )
    plan = ingest(load_manifest(manifest_path))
    start = time.perf_counter()
    run_all(plan, workers=args.workers)
    print(f"pipeline finished in {time.perf_counter() - start:.1f}s -> {plan.out_dir}")

    print(f"\n{'condition':<10} {'dim':<8} {'ccc range':<24} {'pos%':>6} {'neg%':>6}")
    for agg in json.loads((plan.out_dir / "aggregates.json").read_text()):
        trend = agg["trend_mean_pct"]
        print(
            f"{agg['condition']:<10} {agg['dimension']:<8} "
            f"[{agg['ccc_min']:+.4f}, {agg['ccc_max']:+.4f}]     "
            f"{trend['pos']:6.1f} {trend['neg']:6.1f}"
        )


if __name__ == "__main__":
    main()
