"""Built-in deterministic predictor used for end-to-end tests and demos.

The closed form maps global luminance statistics into the affect plane:
brighter scenes read as more aroused, flatter scenes as more pleasant.

    lum      = per-pixel (r + g + b) / 3
    arousal  = clamp(2 * mean(lum) / 255 - 1)
    valence  = clamp(1 - 2 * std(lum) / 128)        # population std

Run as a module it speaks the affect-predict/1 protocol, so it doubles as
the reference implementation for external predictors:

    python -m affectbench.mock_predictor                 # streaming
    python -m affectbench.mock_predictor --batch IN OUT  # batch CSV mode
"""

from __future__ import annotations

import csv
import json
import sys

import numpy as np

from .bridge import PROTOCOL_ID
from .errors import AffectbenchError
from .frames import Frame, load_frame


def mock_predict(frame: Frame) -> tuple[float, float]:
    """Deterministic (arousal, valence) from luminance mean and spread."""
    lum = frame.pixels.astype(np.float64).mean(axis=2)
    mean = float(lum.mean())
    spread = float(lum.std())
    arousal = min(1.0, max(-1.0, 2.0 * mean / 255.0 - 1.0))
    valence = min(1.0, max(-1.0, 1.0 - 2.0 * spread / 128.0))
    return arousal, valence


def _predict_path(path: str) -> tuple[float | None, float | None, bool]:
    try:
        arousal, valence = mock_predict(load_frame(path))
        return arousal, valence, True
    except (AffectbenchError, OSError) as e:
        print(f"mock_predictor: {e}", file=sys.stderr)
        return None, None, False


def _serve_stream() -> int:
    out = sys.stdout
    out.write(json.dumps({"protocol": PROTOCOL_ID}) + "\n")
    out.flush()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        arousal, valence, face = _predict_path(request["frame_path"])
        out.write(
            json.dumps(
                {
                    "id": request["id"],
                    "arousal": arousal,
                    "valence": valence,
                    "face_detected": face,
                }
            )
            + "\n"
        )
        out.flush()
    return 0


def _serve_batch(in_path: str, out_path: str) -> int:
    with open(in_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "arousal", "valence", "face_detected"])
        for row in rows:
            arousal, valence, face = _predict_path(row["frame_path"])
            writer.writerow(
                [
                    row["id"],
                    "" if arousal is None else repr(arousal),
                    "" if valence is None else repr(valence),
                    "true" if face else "false",
                ]
            )
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if argv[:1] == ["--batch"]:
        if len(argv) != 3:
            print("usage: mock_predictor --batch IN.csv OUT.csv", file=sys.stderr)
            return 2
        return _serve_batch(argv[1], argv[2])
    if argv:
        print(f"mock_predictor: unknown arguments {argv}", file=sys.stderr)
        return 2
    return _serve_stream()


if __name__ == "__main__":
    sys.exit(main())
