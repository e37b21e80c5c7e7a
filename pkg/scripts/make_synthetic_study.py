#!/usr/bin/env python3
"""Generate a synthetic study (frames + manifest) for demos and benchmarks."""

import argparse
from pathlib import Path

from affectbench.synthetic import write_synthetic_study


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("root", type=Path, help="directory to create the study in")
    parser.add_argument("--participants", type=int, default=3)
    parser.add_argument("--frames", type=int, default=208, help="frames per participant")
    parser.add_argument("--exclude-first", type=int, default=8, help="leading frames to exclude")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    manifest = write_synthetic_study(
        args.root,
        participants=args.participants,
        frames_per_participant=args.frames,
        exclude_first=args.exclude_first,
        seed=args.seed,
    )
    print(f"wrote {manifest}")
    print(f"next: affectbench run --manifest {manifest}")


if __name__ == "__main__":
    main()
