"""Study manifest: participants, conditions, predictor, output, seed.

Manifest JSON shape:

    {
      "participants": [
        {"id": "p01", "frames_dir": "frames/p01",
         "bbox": {"x": 4, "y": 4, "w": 64, "h": 64},
         "exclude_ranges": [[0, 7]],
         "index_map": {"intro_a.png": 0}}          // optional
      ],
      "conditions": [{"kind": "lighter"}, {"kind": "noise", "seed": 7}],
      "predictor": "builtin:mock",                  // or an argv list
      "output_dir": "out",
      "global_seed": 7
    }

Relative paths resolve against the manifest's directory.  Conditions use
the CorruptionSpec serialization; omitted parameters take their documented
defaults, and a noise condition without a seed falls back to the study
seed (derived per participant by the harness).
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .corruptions import CorruptionSpec
from .errors import ValidationError
from .frames import BoundingBox

BUILTIN_MOCK = "builtin:mock"

_SEED_MAX = (1 << 64) - 1


@dataclass
class ParticipantEntry:
    id: str
    frames_dir: Path
    bbox: BoundingBox
    exclude_ranges: list[tuple[int, int]] = field(default_factory=list)
    index_map: dict[str, int] | None = None


@dataclass
class StudyManifest:
    participants: list[ParticipantEntry]
    conditions: list[CorruptionSpec]
    predictor: list[str]
    output_dir: Path
    global_seed: int


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ValidationError(f"manifest {context} missing required key {key!r}")
    return obj[key]


def _parse_exclude_ranges(raw, pid: str) -> list[tuple[int, int]]:
    if raw is None:
        return []
    ranges: list[tuple[int, int]] = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValidationError(f"participant {pid!r}: exclude range must be [start, end]: {item!r}")
        start, end = item
        if not isinstance(start, int) or not isinstance(end, int) or start < 0 or end < start:
            raise ValidationError(f"participant {pid!r}: malformed exclude range {item!r}")
        ranges.append((start, end))
    for (_, prev_end), (next_start, _) in zip(ranges, ranges[1:]):
        if next_start <= prev_end:
            raise ValidationError(
                f"participant {pid!r}: exclude ranges must be ordered and non-overlapping"
            )
    return ranges


def resolve_predictor(raw) -> list[str]:
    """Normalize the manifest predictor field to an argv list."""
    if raw == BUILTIN_MOCK:
        return [sys.executable, "-m", "affectbench.mock_predictor"]
    if isinstance(raw, list) and raw and all(isinstance(a, str) for a in raw):
        return list(raw)
    raise ValidationError(
        f"predictor must be {BUILTIN_MOCK!r} or a non-empty list of strings, got {raw!r}"
    )


def parse_manifest(data: dict, base_dir: Path) -> StudyManifest:
    if not isinstance(data, dict):
        raise ValidationError("manifest must be a JSON object")

    participants = []
    seen_ids: set[str] = set()
    for entry in _require(data, "participants", "root"):
        pid = _require(entry, "id", "participant")
        if not isinstance(pid, str) or not pid:
            raise ValidationError(f"participant id must be a non-empty string, got {pid!r}")
        if pid in seen_ids:
            raise ValidationError(f"duplicate participant id {pid!r}")
        seen_ids.add(pid)
        frames_dir = base_dir / Path(str(_require(entry, "frames_dir", f"participant {pid!r}")))
        bbox_raw = _require(entry, "bbox", f"participant {pid!r}")
        try:
            bbox = BoundingBox(
                int(bbox_raw["x"]), int(bbox_raw["y"]), int(bbox_raw["w"]), int(bbox_raw["h"])
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"participant {pid!r}: malformed bbox {bbox_raw!r}: {e}") from e
        index_map = entry.get("index_map")
        if index_map is not None:
            if not isinstance(index_map, dict) or not all(
                isinstance(k, str) and isinstance(v, int) for k, v in index_map.items()
            ):
                raise ValidationError(f"participant {pid!r}: index_map must map filenames to integers")
        participants.append(
            ParticipantEntry(
                id=pid,
                frames_dir=frames_dir,
                bbox=bbox,
                exclude_ranges=_parse_exclude_ranges(entry.get("exclude_ranges"), pid),
                index_map=index_map,
            )
        )
    if not participants:
        raise ValidationError("manifest declares no participants")

    conditions = [CorruptionSpec.from_dict(c) for c in _require(data, "conditions", "root")]
    kinds = [c.kind for c in conditions]
    if len(set(kinds)) != len(kinds):
        raise ValidationError(f"condition kinds must be unique per manifest, got {kinds}")
    if not conditions:
        raise ValidationError("manifest declares no conditions")

    global_seed = _require(data, "global_seed", "root")
    if not isinstance(global_seed, int) or not 0 <= global_seed <= _SEED_MAX:
        raise ValidationError(f"global_seed must be an unsigned 64-bit integer, got {global_seed!r}")

    return StudyManifest(
        participants=participants,
        conditions=conditions,
        predictor=resolve_predictor(_require(data, "predictor", "root")),
        output_dir=base_dir / Path(str(_require(data, "output_dir", "root"))),
        global_seed=global_seed,
    )


def load_manifest(path: str | Path) -> StudyManifest:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError:
        raise  # I/O failure; the CLI maps this to exit code 3
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ValidationError(f"manifest {path} is not valid JSON: {e}") from e
    return parse_manifest(data, path.parent.resolve())
