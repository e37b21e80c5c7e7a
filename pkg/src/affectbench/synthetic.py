"""Procedural face-like frame sequences for tests and demos.

Each frame is a dim scene: a bright elliptical "face" on a black
background with fixed-size mid-gray features (eyes, mouth).  The face area
breathes sinusoidally per frame, so mean luminance varies smoothly while
the palette stays at {0, 60, 255}.  That palette pins down the expected
pipeline behavior: the default lighter gain moves only the gray features
(a small consistent overestimation with near-perfect agreement), while
impulse noise pulls the dark scene mean toward mid-gray and dominates the
small luminance signal, degrading agreement.

All geometry derives from the counter-based stream, so a given
(participant, seed) always produces identical frames.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .frames import Frame, save_frame
from .rng import derive_seed, uniform_at

FRAME_SIZE = 72
CROP = {"x": 4, "y": 4, "w": 64, "h": 64}
FACE_VALUE = 255
FEATURE_VALUE = 60
BACKGROUND = 0


def synthetic_face_frame(
    t: int,
    *,
    phase: float,
    width: int = FRAME_SIZE,
    height: int = FRAME_SIZE,
    base_radius: float = 7.5,
    breath: float = 1.5,
) -> Frame:
    """One face-like frame; luminance varies with the breathing face area."""
    cx = width / 2.0 + 2.0 * math.sin(2.0 * math.pi * t / 63.0 + 1.7 * phase)
    cy = height / 2.0 + 2.0 * math.cos(2.0 * math.pi * t / 71.0 + phase)
    rx = base_radius + breath * math.sin(2.0 * math.pi * t / 47.0 + phase)
    ry = 0.95 * rx

    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    face = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    img = np.full((height, width, 3), BACKGROUND, dtype=np.uint8)
    img[face] = FACE_VALUE

    # features keep a fixed pixel count so the brightness delta is constant
    icx, icy = int(round(cx)), int(round(cy))
    for offset in (-3, 2):
        img[icy - 2 : icy, icx + offset : icx + offset + 2] = FEATURE_VALUE
    img[icy + 3 : icy + 4, icx - 3 : icx + 3] = FEATURE_VALUE
    return Frame(img)


def generate_participant_frames(
    frames_dir: Path, participant_id: str, n_frames: int, *, seed: int
) -> list[Path]:
    frames_dir.mkdir(parents=True, exist_ok=True)
    participant_seed = derive_seed(seed, "synthetic", participant_id)
    phase = 2.0 * math.pi * uniform_at(participant_seed, 0)
    base_radius = 7.0 + uniform_at(participant_seed, 1)
    paths = []
    for t in range(n_frames):
        frame = synthetic_face_frame(t, phase=phase, base_radius=base_radius)
        path = frames_dir / f"{t:06d}.png"
        save_frame(frame, path)
        paths.append(path)
    return paths


def write_synthetic_study(
    root: Path,
    *,
    participants: int = 3,
    frames_per_participant: int = 208,
    exclude_first: int = 8,
    seed: int = 7,
    predictor="builtin:mock",
) -> Path:
    """Generate frames plus a ready-to-run manifest; returns the manifest path.

    The first `exclude_first` frames stand in for instruction footage and are
    listed in each participant's exclude_ranges.
    """
    root = Path(root)
    ids = [f"sp{i + 1:02d}" for i in range(participants)]
    for pid in ids:
        generate_participant_frames(root / "frames" / pid, pid, frames_per_participant, seed=seed)

    manifest = {
        "participants": [
            {
                "id": pid,
                "frames_dir": f"frames/{pid}",
                "bbox": dict(CROP),
                "exclude_ranges": [[0, exclude_first - 1]] if exclude_first else [],
            }
            for pid in ids
        ],
        "conditions": [
            {"kind": "lighter"},
            {"kind": "darker"},
            {"kind": "gaussian"},
            {"kind": "noise"},
            {"kind": "motion"},
        ],
        "predictor": predictor,
        "output_dir": "out",
        "global_seed": seed,
    }
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path
