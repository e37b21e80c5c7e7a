"""End-to-end study pipeline: ingest -> corrupt -> predict -> evaluate -> report.

Stage outputs land under the manifest's output directory:

    <out>/original/<pid>/<frame>.png      cropped source frames
    <out>/<kind>/<pid>/<frame>.png        corrupted variants, one dir per condition
    <out>/predictions/<cond>/<pid>.csv    participant_id,condition,frame_index,arousal,valence,valid
    <out>/evaluation/<cond>/<pid>.json    per-cell agreement statistics
    <out>/deviations/<cond>/<pid>_<dim>.csv   frame_index,original,condition_value,delta
    <out>/summary.csv                     min/max CCC table per condition
    <out>/aggregates.json                 distributions and trend aggregates
    <out>/metadata.json                   conventions, parameters, seeds, versions
    <out>/ledger.json                     stage fingerprints (content hashes)
    <out>/run.log                         timestamped sidecar log (only mutable artifact)

Identical manifest and seed reproduce every artifact byte for byte except
run.log.  Conditions are applied to the cropped original independently
(never chained), and the per-frame noise seed is
derive(global_seed, participant_id, frame_index) unless the manifest pins
a seed for the noise condition.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .bridge import DEFAULT_TIMEOUT, AffectSample, AffectSequence, run_predictor
from .corruptions import CorruptionSpec, apply as apply_corruption
from .errors import ValidationError
from .frames import FrameRef, crop, load_frame, save_frame
from .ledger import RunLedger, fingerprint, hash_file, hash_tree
from .manifest import ParticipantEntry, StudyManifest
from .metrics import DIMENSIONS, AgreementStats, agreement_stats, align, deviation
from .rng import derive_seed

log = logging.getLogger("affectbench")

_FRAME_SUFFIXES = {".png", ".ppm", ".pnm"}

ORIGINAL = "original"


@dataclass
class ParticipantPlan:
    entry: ParticipantEntry
    refs: list[FrameRef]  # exclusions applied, strictly increasing frame_index

    @property
    def id(self) -> str:
        return self.entry.id


@dataclass
class StudyPlan:
    participants: list[ParticipantPlan]
    conditions: list[CorruptionSpec]
    predictor: list[str]
    out_dir: Path
    global_seed: int

    @property
    def condition_kinds(self) -> list[str]:
        return [c.kind for c in self.conditions]

    def resolved_spec(self, spec: CorruptionSpec, participant_id: str) -> CorruptionSpec:
        """Per-participant noise seed: derive(base_seed, participant_id)."""
        if spec.kind != "noise":
            return spec
        base = spec.seed if spec.seed is not None else self.global_seed
        return spec.with_seed(derive_seed(base, participant_id))


def _excluded(index: int, ranges: list[tuple[int, int]]) -> bool:
    return any(start <= index <= end for start, end in ranges)


def _enumerate_refs(entry: ParticipantEntry) -> list[FrameRef]:
    if not entry.frames_dir.is_dir():
        raise ValidationError(
            f"participant {entry.id!r}: frames directory {entry.frames_dir} does not exist"
        )
    files = sorted(p for p in entry.frames_dir.iterdir() if p.suffix.lower() in _FRAME_SUFFIXES)
    if not files:
        raise ValidationError(f"participant {entry.id!r}: no frames in {entry.frames_dir}")
    indexed: list[tuple[int, Path]] = []
    for path in files:
        if entry.index_map is not None and path.name in entry.index_map:
            index = entry.index_map[path.name]
        elif path.stem.isdigit():
            index = int(path.stem)
        else:
            raise ValidationError(
                f"participant {entry.id!r}: cannot derive a frame index from {path.name!r}; "
                f"use zero-padded numeric filenames or an index_map"
            )
        indexed.append((index, path))
    indexed.sort()
    for (a, pa), (b, pb) in zip(indexed, indexed[1:]):
        if a == b:
            raise ValidationError(
                f"participant {entry.id!r}: duplicate frame index {a} ({pa.name}, {pb.name})"
            )
    return [
        FrameRef(entry.id, index, path)
        for index, path in indexed
        if not _excluded(index, entry.exclude_ranges)
    ]


def ingest(
    manifest: StudyManifest,
    *,
    conditions: list[str] | None = None,
    out_dir: Path | None = None,
    global_seed: int | None = None,
) -> StudyPlan:
    """Validate the manifest against the filesystem and enumerate all frames."""
    selected = manifest.conditions
    if conditions is not None:
        known = {c.kind: c for c in manifest.conditions}
        missing = [k for k in conditions if k not in known]
        if missing:
            raise ValidationError(f"conditions {missing} not declared in the manifest")
        selected = [known[k] for k in conditions]

    participants = []
    for entry in manifest.participants:
        refs = _enumerate_refs(entry)
        if not refs:
            raise ValidationError(
                f"participant {entry.id!r}: all frames fall inside exclude ranges"
            )
        sample = load_frame(refs[0].source_path)
        box = entry.bbox
        if box.x + box.w > sample.width or box.y + box.h > sample.height:
            raise ValidationError(
                f"participant {entry.id!r}: bbox {box} exceeds frame size "
                f"{sample.width}x{sample.height} ({refs[0].source_path.name})"
            )
        participants.append(ParticipantPlan(entry, refs))
        log.info("ingest: participant %s, %d frames", entry.id, len(refs))

    return StudyPlan(
        participants=participants,
        conditions=selected,
        predictor=manifest.predictor,
        out_dir=Path(out_dir) if out_dir is not None else manifest.output_dir,
        global_seed=manifest.global_seed if global_seed is None else global_seed,
    )


# ---------------------------------------------------------------------------
# corruption stage


def _source_digest(plan: StudyPlan) -> list:
    return [
        {
            "id": p.id,
            "bbox": [p.entry.bbox.x, p.entry.bbox.y, p.entry.bbox.w, p.entry.bbox.h],
            "frames": [[r.frame_index, r.source_path.stem, hash_file(r.source_path)] for r in p.refs],
        }
        for p in plan.participants
    ]


def _corrupt_fingerprints(plan: StudyPlan, sources: list) -> dict[str, str]:
    fps = {f"corrupt:{ORIGINAL}": fingerprint({"v": 1, "sources": sources})}
    for spec in plan.conditions:
        payload = {"v": 1, "sources": sources, "spec": spec.to_dict()}
        if spec.kind == "noise":
            payload["seeds"] = {
                p.id: plan.resolved_spec(spec, p.id).seed for p in plan.participants
            }
        fps[f"corrupt:{spec.kind}"] = fingerprint(payload)
    return fps


def run_corruption_stage(plan: StudyPlan, *, workers: int = 4) -> list[str]:
    """Crop originals and write each condition's corrupted tree.

    Conditions are independent sub-stages in the ledger, so adding one never
    rewrites another.  Returns the sub-stages that actually ran.
    """
    ledger = RunLedger.load(plan.out_dir)
    fps = _corrupt_fingerprints(plan, _source_digest(plan))
    stale = {name: fp for name, fp in fps.items() if not ledger.is_current(name, fp)}
    if not stale:
        log.info("corrupt: all conditions up to date, skipping")
        return []

    write_original = f"corrupt:{ORIGINAL}" in stale
    stale_specs = [s for s in plan.conditions if f"corrupt:{s.kind}" in stale]
    log.info("corrupt: running %s", sorted(stale))

    def corrupt_one(participant: ParticipantPlan, ref: FrameRef) -> None:
        face = crop(load_frame(ref.source_path), participant.entry.bbox)
        name = f"{ref.source_path.stem}.png"
        if write_original:
            save_frame(face, plan.out_dir / ORIGINAL / participant.id / name)
        for spec in stale_specs:
            resolved = plan.resolved_spec(spec, participant.id)
            corrupted = apply_corruption(face, resolved, ref.frame_index)
            save_frame(corrupted, plan.out_dir / spec.kind / participant.id / name)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [
            pool.submit(corrupt_one, participant, ref)
            for participant in plan.participants
            for ref in participant.refs
        ]
        for future in futures:
            future.result()

    for name, fp in stale.items():
        ledger.record(name, fp)
    return sorted(stale)


# ---------------------------------------------------------------------------
# prediction stage


def _prediction_csv(plan: StudyPlan, condition: str, pid: str) -> Path:
    return plan.out_dir / "predictions" / condition / f"{pid}.csv"


def _write_prediction_csv(path: Path, seq: AffectSequence) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["participant_id", "condition", "frame_index", "arousal", "valence", "valid"])
        for s in seq.samples:
            writer.writerow(
                [
                    seq.participant_id,
                    seq.condition,
                    s.frame_index,
                    "" if s.arousal is None else repr(s.arousal),
                    "" if s.valence is None else repr(s.valence),
                    "true" if s.valid else "false",
                ]
            )


def read_prediction_csv(path: Path, participant_id: str, condition: str) -> AffectSequence:
    if not path.is_file():
        raise ValidationError(f"missing prediction file {path}; run the predict stage first")
    samples = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            valid = row["valid"].strip().lower() == "true"
            samples.append(
                AffectSample(
                    frame_index=int(row["frame_index"]),
                    arousal=float(row["arousal"]) if valid else None,
                    valence=float(row["valence"]) if valid else None,
                    valid=valid,
                )
            )
    return AffectSequence(participant_id, condition, samples)


def run_prediction_stage(
    plan: StudyPlan,
    *,
    workers: int = 4,
    timeout: float = DEFAULT_TIMEOUT,
    batch_mode: bool = False,
) -> list[str]:
    """Run the predictor over original and corrupted trees, one CSV per cell."""
    ledger = RunLedger.load(plan.out_dir)
    cells = [
        (condition, participant)
        for condition in [ORIGINAL, *plan.condition_kinds]
        for participant in plan.participants
    ]

    stale = []
    for condition, participant in cells:
        tree = plan.out_dir / condition / participant.id
        if not tree.is_dir():
            raise ValidationError(f"missing corrupted frames under {tree}; run the corrupt stage first")
        fp = fingerprint(
            {
                "v": 1,
                "tree": hash_tree(tree),
                "predictor": plan.predictor,
                "batch_mode": batch_mode,
                "timeout": timeout,
                "expected": [r.frame_index for r in participant.refs],
            }
        )
        key = f"predict:{condition}:{participant.id}"
        if not ledger.is_current(key, fp):
            stale.append((condition, participant, key, fp))

    if not stale:
        log.info("predict: all cells up to date, skipping")
        return []
    log.info("predict: running %d of %d cells", len(stale), len(cells))

    def predict_cell(condition: str, participant: ParticipantPlan) -> None:
        refs = [
            FrameRef(
                participant.id,
                r.frame_index,
                plan.out_dir / condition / participant.id / f"{r.source_path.stem}.png",
            )
            for r in participant.refs
        ]
        seq = run_predictor(
            plan.predictor,
            refs,
            participant_id=participant.id,
            condition=condition,
            timeout=timeout,
            batch_mode=batch_mode,
        )
        if len(seq) != len(refs):
            raise ValidationError(
                f"prediction count mismatch for {participant.id}/{condition}: "
                f"{len(seq)} responses for {len(refs)} frames"
            )
        _write_prediction_csv(_prediction_csv(plan, condition, participant.id), seq)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {
            pool.submit(predict_cell, condition, participant): key
            for condition, participant, key, _ in stale
        }
        for future in futures:
            future.result()

    for _, _, key, fp in stale:
        ledger.record(key, fp)
    return [key for _, _, key, _ in stale]


# ---------------------------------------------------------------------------
# evaluation stage


def _cell_json(plan: StudyPlan, condition: str, pid: str) -> Path:
    return plan.out_dir / "evaluation" / condition / f"{pid}.json"


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _stats_payload(pid: str, condition: str, dimension: str, stats: AgreementStats) -> dict:
    return {
        "participant": pid,
        "condition": condition,
        "dimension": dimension,
        "ccc": stats.ccc,
        "pearson": stats.pearson,
        "pearson_degenerate": stats.pearson_degenerate,
        "pos_pct": stats.pos_pct,
        "neg_pct": stats.neg_pct,
        "zero_pct": stats.zero_pct,
        "mean_delta": stats.mean_delta,
        "min_delta": stats.min_delta,
        "max_delta": stats.max_delta,
        "n": stats.n,
    }


def run_evaluation_stage(plan: StudyPlan, *, zero_tolerance: float = 0.0) -> None:
    """Compute per-cell agreement artifacts, then the aggregate reports."""
    ledger = RunLedger.load(plan.out_dir)
    prediction_files = sorted((plan.out_dir / "predictions").glob("**/*.csv"))
    fp = fingerprint(
        {
            "v": 1,
            "predictions": [[str(p.relative_to(plan.out_dir)), hash_file(p)] for p in prediction_files],
            "zero_tolerance": zero_tolerance,
            "conditions": [c.to_dict() for c in plan.conditions],
            "toolkit_version": __version__,
        }
    )
    if ledger.is_current("evaluate", fp):
        log.info("evaluate: up to date, skipping")
        return

    skipped: list[dict] = []
    for participant in plan.participants:
        pid = participant.id
        orig = read_prediction_csv(_prediction_csv(plan, ORIGINAL, pid), pid, ORIGINAL)
        for condition in plan.condition_kinds:
            cond = read_prediction_csv(_prediction_csv(plan, condition, pid), pid, condition)
            paired = align(orig, cond)
            payload = []
            for dimension in DIMENSIONS:
                if len(paired) < 2:
                    reason = f"only {len(paired)} aligned valid pairs"
                    log.warning("evaluate: skipping %s/%s/%s (%s)", pid, condition, dimension, reason)
                    skipped.append(
                        {
                            "participant": pid,
                            "condition": condition,
                            "dimension": dimension,
                            "reason": reason,
                        }
                    )
                    continue
                stats = agreement_stats(paired, dimension, zero_tolerance)
                payload.append(_stats_payload(pid, condition, dimension, stats))
                _write_deviation_csv(plan, paired, dimension)
            _write_json(_cell_json(plan, condition, pid), payload)

    write_reports(plan, zero_tolerance=zero_tolerance, skipped_cells=skipped)
    ledger.record("evaluate", fp)


def _write_deviation_csv(plan: StudyPlan, paired, dimension: str) -> None:
    dev = deviation(paired, dimension)
    orig, cond = paired.values(dimension)
    path = plan.out_dir / "deviations" / paired.condition / f"{paired.participant_id}_{dimension}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_index", "original", "condition_value", "delta"])
        for (index, delta), o, c in zip(dev.deltas, orig, cond):
            writer.writerow([index, repr(float(o)), repr(float(c)), repr(float(delta))])


# ---------------------------------------------------------------------------
# report stage (aggregates over the per-cell evaluation artifacts)


def load_cell_stats(plan: StudyPlan) -> dict[tuple[str, str, str], AgreementStats]:
    stats: dict[tuple[str, str, str], AgreementStats] = {}
    for participant in plan.participants:
        for condition in plan.condition_kinds:
            path = _cell_json(plan, condition, participant.id)
            if not path.is_file():
                raise ValidationError(f"missing evaluation file {path}; run the evaluate stage first")
            for obj in json.loads(path.read_text(encoding="utf-8")):
                stats[(obj["participant"], obj["condition"], obj["dimension"])] = AgreementStats(
                    ccc=obj["ccc"],
                    pearson=obj["pearson"],
                    pearson_degenerate=obj["pearson_degenerate"],
                    pos_pct=obj["pos_pct"],
                    neg_pct=obj["neg_pct"],
                    zero_pct=obj["zero_pct"],
                    mean_delta=obj["mean_delta"],
                    min_delta=obj["min_delta"],
                    max_delta=obj["max_delta"],
                    n=obj["n"],
                )
    if not stats:
        raise ValidationError("no evaluation cells found; nothing to report")
    return stats


def write_reports(
    plan: StudyPlan,
    *,
    zero_tolerance: float = 0.0,
    skipped_cells: list[dict] | None = None,
    stats: dict[tuple[str, str, str], AgreementStats] | None = None,
) -> None:
    """Emit summary.csv, aggregates.json and metadata.json."""
    from .metrics import aggregate  # local import keeps module deps acyclic

    if stats is None:
        stats = load_cell_stats(plan)
    summaries = aggregate(stats, conditions=plan.condition_kinds)
    by_cell = {(s.condition, s.dimension): s for s in summaries}

    summary_path = plan.out_dir / "summary.csv"
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    with summary_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["condition", "arousal_min_ccc", "arousal_max_ccc", "valence_min_ccc", "valence_max_ccc"]
        )
        for condition in plan.condition_kinds:
            arousal = by_cell.get((condition, "arousal"))
            valence = by_cell.get((condition, "valence"))
            writer.writerow(
                [
                    condition,
                    repr(arousal.ccc_min) if arousal else "",
                    repr(arousal.ccc_max) if arousal else "",
                    repr(valence.ccc_min) if valence else "",
                    repr(valence.ccc_max) if valence else "",
                ]
            )

    _write_json(
        plan.out_dir / "aggregates.json",
        [
            {
                "condition": s.condition,
                "dimension": s.dimension,
                "participants": s.participants,
                "ccc_values": s.ccc_values,
                "ccc_min": s.ccc_min,
                "ccc_max": s.ccc_max,
                "ccc_mean": s.ccc_mean,
                "ccc_median": s.ccc_median,
                "trend_mean_pct": {
                    "pos": s.trend_mean.pos_pct,
                    "neg": s.trend_mean.neg_pct,
                    "zero": s.trend_mean.zero_pct,
                },
                "trend_pooled_pct": {
                    "pos": s.trend_pooled.pos_pct,
                    "neg": s.trend_pooled.neg_pct,
                    "zero": s.trend_pooled.zero_pct,
                },
                "total_n": s.total_n,
            }
            for s in summaries
        ],
    )

    _write_json(
        plan.out_dir / "metadata.json",
        {
            "toolkit": "affectbench",
            "toolkit_version": __version__,
            "moment_convention": "population",
            "zero_tolerance": zero_tolerance,
            "global_seed": plan.global_seed,
            "predictor": plan.predictor,
            "conditions": [c.to_dict() for c in plan.conditions],
            "participants": [p.id for p in plan.participants],
            "skipped_cells": skipped_cells or [],
        },
    )
    log.info("report: wrote %s", summary_path)


def run_all(
    plan: StudyPlan,
    *,
    workers: int = 4,
    timeout: float = DEFAULT_TIMEOUT,
    batch_mode: bool = False,
    zero_tolerance: float = 0.0,
) -> None:
    run_corruption_stage(plan, workers=workers)
    run_prediction_stage(plan, workers=workers, timeout=timeout, batch_mode=batch_mode)
    run_evaluation_stage(plan, zero_tolerance=zero_tolerance)
