"""Command line entry point.

    affectbench corrupt  --manifest study.json [--out DIR] [--conditions a,b] [--workers N]
    affectbench predict  --manifest study.json [--batch-mode] [--workers N]
    affectbench evaluate --manifest study.json [--zero-tolerance X]
    affectbench report   --manifest study.json
    affectbench run      --manifest study.json [--seed N] ...

Exit codes: 0 success, 1 validation error, 2 predictor failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bridge import DEFAULT_TIMEOUT
from .errors import FrameDecodeError, PredictorError, ValidationError
from .harness import (
    ingest,
    run_all,
    run_corruption_stage,
    run_evaluation_stage,
    run_prediction_stage,
    write_reports,
)
from .manifest import load_manifest

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PREDICTOR = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affectbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("corrupt", "crop originals and write corrupted frame trees"),
        ("predict", "run the predictor over original and corrupted frames"),
        ("evaluate", "compute per-cell agreement statistics and reports"),
        ("report", "rebuild aggregate reports from existing evaluation cells"),
        ("run", "all stages in order"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--manifest", required=True, help="path to the study manifest JSON")
        cmd.add_argument("--out", default=None, help="override the manifest output_dir")
        cmd.add_argument("--seed", type=int, default=None, help="override the manifest global_seed")
        cmd.add_argument(
            "--conditions",
            default=None,
            help="comma-separated subset of manifest condition kinds",
        )
        cmd.add_argument("--workers", type=int, default=4, help="worker pool size (default 4)")
        cmd.add_argument(
            "--zero-tolerance",
            type=float,
            default=0.0,
            help="deviation magnitude treated as zero in trend percentages (default 0)",
        )
        cmd.add_argument(
            "--batch-mode",
            action="store_true",
            help="drive the predictor through batch CSV files instead of streaming",
        )
        cmd.add_argument(
            "--timeout",
            type=float,
            default=DEFAULT_TIMEOUT,
            help=f"per-request predictor timeout in seconds (default {DEFAULT_TIMEOUT:g})",
        )
    return parser


def _setup_logging(out_dir) -> None:
    logger = logging.getLogger("affectbench")
    logger.setLevel(logging.INFO)
    logger.handlers.clear()
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(stream)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(out_dir / "run.log", encoding="utf-8")
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(message)s")
        )
        logger.addHandler(file_handler)
    except OSError:
        pass  # reports must still work on read-only output inspection


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    conditions = args.conditions.split(",") if args.conditions else None
    try:
        manifest = load_manifest(args.manifest)
        plan = ingest(manifest, conditions=conditions, out_dir=args.out, global_seed=args.seed)
        _setup_logging(plan.out_dir)
        if args.command == "corrupt":
            run_corruption_stage(plan, workers=args.workers)
        elif args.command == "predict":
            run_prediction_stage(
                plan, workers=args.workers, timeout=args.timeout, batch_mode=args.batch_mode
            )
        elif args.command == "evaluate":
            run_evaluation_stage(plan, zero_tolerance=args.zero_tolerance)
        elif args.command == "report":
            write_reports(plan, zero_tolerance=args.zero_tolerance)
        elif args.command == "run":
            run_all(
                plan,
                workers=args.workers,
                timeout=args.timeout,
                batch_mode=args.batch_mode,
                zero_tolerance=args.zero_tolerance,
            )
    except ValidationError as e:
        print(f"affectbench: validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except PredictorError as e:
        print(f"affectbench: predictor failure: {e}", file=sys.stderr)
        return EXIT_PREDICTOR
    except (FrameDecodeError, OSError) as e:
        print(f"affectbench: I/O failure: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
