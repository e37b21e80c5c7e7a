"""Wire protocol for external frame-wise arousal-valence predictors.

Streaming mode (affect-predict/1): the predictor is a long-lived child
process speaking newline-delimited JSON on stdin/stdout.  On start it must
emit the handshake line

    {"protocol": "affect-predict/1"}

then answer one request line with one response line:

    request:  {"id": 12, "frame_path": "p03/lighter/000012.png"}
    response: {"id": 12, "arousal": 0.31, "valence": 0.55, "face_detected": true}

When face_detected is false, arousal and valence must be null; the sample
is carried downstream as invalid rather than dropped.

Batch mode: for predictors that cannot stream, the command is invoked as
`<cmd> --batch <in.csv> <out.csv>` with input header id,frame_path and
output header id,arousal,valence,face_detected (empty fields for null).
There is no handshake line in batch mode; validation is otherwise the same.
"""

from __future__ import annotations

import csv
import json
import queue
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import PredictorError, ValidationError
from .frames import FrameRef

PROTOCOL_ID = "affect-predict/1"
DEFAULT_TIMEOUT = 30.0

KNOWN_CONDITIONS = ("original", "lighter", "darker", "gaussian", "noise", "motion")


@dataclass(frozen=True)
class PredictionRequest:
    id: int
    frame_path: str


@dataclass(frozen=True)
class PredictionResponse:
    id: int
    arousal: float | None
    valence: float | None
    face_detected: bool


@dataclass(frozen=True)
class AffectSample:
    """Per-frame (arousal, valence) reading; invalid when the face was not found."""

    frame_index: int
    arousal: float | None
    valence: float | None
    valid: bool

    def __post_init__(self):
        present = self.arousal is not None and self.valence is not None
        in_range = present and -1.0 <= self.arousal <= 1.0 and -1.0 <= self.valence <= 1.0
        if self.valid != in_range:
            raise ValidationError(
                f"sample validity flag inconsistent with values "
                f"(frame {self.frame_index}: arousal={self.arousal}, valence={self.valence})"
            )


@dataclass
class AffectSequence:
    """Ordered per-frame samples for one participant under one condition."""

    participant_id: str
    condition: str
    samples: list[AffectSample] = field(default_factory=list)

    def __post_init__(self):
        if self.condition not in KNOWN_CONDITIONS:
            raise ValidationError(
                f"unknown condition {self.condition!r}; expected one of {KNOWN_CONDITIONS}"
            )
        indices = [s.frame_index for s in self.samples]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValidationError(
                f"frame indices must be strictly increasing for {self.participant_id}/{self.condition}"
            )

    def __len__(self) -> int:
        return len(self.samples)


class _PipeReader(threading.Thread):
    """Drains a pipe into a queue so reads can be given a timeout."""

    def __init__(self, stream):
        super().__init__(daemon=True)
        self.stream = stream
        self.lines: queue.Queue = queue.Queue()
        self.start()

    def run(self):
        try:
            for line in self.stream:
                self.lines.put(line)
        except ValueError:
            pass  # stream closed from the main thread
        self.lines.put(None)  # EOF marker

    def get(self, timeout: float) -> str | None:
        try:
            return self.lines.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError


class PredictorSession:
    """One streaming predictor child process."""

    def __init__(self, command: Sequence[str], timeout: float = DEFAULT_TIMEOUT):
        self.command = list(command)
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as e:
            raise PredictorError(f"failed to spawn predictor {self.command}: {e}") from e
        self._stdout = _PipeReader(self.proc.stdout)
        self._stderr = _PipeReader(self.proc.stderr)
        self._handshake()

    def _stderr_tail(self) -> str:
        parts = []
        try:
            while True:
                line = self._stderr.lines.get_nowait()
                if line is None:
                    break
                parts.append(line)
        except queue.Empty:
            pass
        tail = "".join(parts[-5:]).strip()
        return f" (stderr: {tail})" if tail else ""

    def _read_line(self, context: str) -> str:
        try:
            line = self._stdout.get(self.timeout)
        except TimeoutError:
            self.close()
            raise PredictorError(f"predictor timed out after {self.timeout}s {context}")
        if line is None:
            raise PredictorError(f"predictor exited {context}{self._stderr_tail()}")
        return line

    def _handshake(self):
        line = self._read_line("before handshake")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            obj = None
        if not isinstance(obj, dict) or obj.get("protocol") != PROTOCOL_ID:
            self.close()
            raise PredictorError(
                f"protocol error: first line is not the {PROTOCOL_ID} handshake: {line.strip()!r}"
            )

    def request(self, request_id: int, frame_path: str) -> PredictionResponse:
        payload = json.dumps({"id": request_id, "frame_path": frame_path})
        try:
            self.proc.stdin.write(payload + "\n")
            self.proc.stdin.flush()
        except (OSError, ValueError) as e:
            raise PredictorError(f"predictor pipe closed at id {request_id}: {e}") from e
        line = self._read_line(f"awaiting response to id {request_id}")
        return _parse_response(line, request_id)

    def close(self):
        try:
            if self.proc.stdin and not self.proc.stdin.closed:
                self.proc.stdin.close()
        except OSError:
            pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _parse_response(line: str, expected_id: int) -> PredictionResponse:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        raise PredictorError(f"protocol error: malformed response line {line.strip()!r}")
    if not isinstance(obj, dict):
        raise PredictorError(f"protocol error: response is not an object: {line.strip()!r}")
    if obj.get("id") != expected_id:
        raise PredictorError(
            f"protocol error: unknown response id {obj.get('id')!r} (expected {expected_id})"
        )
    face = obj.get("face_detected")
    if not isinstance(face, bool):
        raise PredictorError(f"protocol error: face_detected missing or not boolean at id {expected_id}")
    arousal = obj.get("arousal")
    valence = obj.get("valence")
    if face:
        for name, value in (("arousal", arousal), ("valence", valence)):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise PredictorError(f"protocol error: {name} missing at id {expected_id}")
            if not -1.0 <= value <= 1.0:
                raise PredictorError(
                    f"protocol error: {name}={value} out of [-1, 1] at id {expected_id}"
                )
    else:
        if arousal is not None or valence is not None:
            raise PredictorError(
                f"protocol error: values must be null when face_detected is false (id {expected_id})"
            )
    return PredictionResponse(expected_id, arousal, valence, face)


def _response_to_sample(response: PredictionResponse, frame_index: int) -> AffectSample:
    if response.face_detected:
        return AffectSample(frame_index, float(response.arousal), float(response.valence), True)
    return AffectSample(frame_index, None, None, False)


def run_predictor(
    command: Sequence[str],
    frames: Sequence[FrameRef],
    *,
    participant_id: str | None = None,
    condition: str = "original",
    timeout: float = DEFAULT_TIMEOUT,
    batch_mode: bool = False,
) -> AffectSequence:
    """Run an external predictor over an ordered frame list.

    Produces exactly one AffectSample per input frame, matched by request
    id; any shortfall, protocol violation, or per-request timeout raises
    PredictorError carrying the last id that completed.
    """
    if participant_id is None:
        participant_id = frames[0].participant_id if frames else ""
    if batch_mode:
        return _run_batch(command, frames, participant_id, condition, timeout)

    samples: list[AffectSample] = []
    last_good: int | None = None
    with PredictorSession(command, timeout=timeout) as session:
        for i, ref in enumerate(frames):
            try:
                response = session.request(i, str(ref.source_path))
            except PredictorError as e:
                raise PredictorError(
                    f"{e} [participant={participant_id} condition={condition}, "
                    f"last good id: {last_good}]",
                    last_good_id=last_good,
                ) from e
            samples.append(_response_to_sample(response, ref.frame_index))
            last_good = i
    return AffectSequence(participant_id, condition, samples)


def _run_batch(command, frames, participant_id, condition, timeout) -> AffectSequence:
    with tempfile.TemporaryDirectory(prefix="affectbench-batch-") as tmp:
        in_path = Path(tmp) / "requests.csv"
        out_path = Path(tmp) / "responses.csv"
        with in_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "frame_path"])
            for i, ref in enumerate(frames):
                writer.writerow([i, str(ref.source_path)])
        argv = [*command, "--batch", str(in_path), str(out_path)]
        try:
            result = subprocess.run(
                argv,
                capture_output=True,
                text=True,
                timeout=max(timeout, timeout * max(len(frames), 1)),
            )
        except OSError as e:
            raise PredictorError(f"failed to spawn predictor {list(command)}: {e}") from e
        except subprocess.TimeoutExpired:
            raise PredictorError(f"batch predictor timed out [{participant_id}/{condition}]")
        if result.returncode != 0:
            tail = result.stderr.strip().splitlines()[-5:]
            raise PredictorError(
                f"batch predictor exited with {result.returncode} "
                f"[{participant_id}/{condition}] {' / '.join(tail)}"
            )
        try:
            rows = list(csv.DictReader(out_path.open(encoding="utf-8")))
        except OSError as e:
            raise PredictorError(f"batch predictor wrote no output file: {e}") from e

    by_id: dict[int, PredictionResponse] = {}
    for row in rows:
        try:
            rid = int(row["id"])
        except (KeyError, TypeError, ValueError):
            raise PredictorError(f"protocol error: malformed batch row {row!r}")
        line = json.dumps(
            {
                "id": rid,
                "arousal": float(row["arousal"]) if row.get("arousal") else None,
                "valence": float(row["valence"]) if row.get("valence") else None,
                "face_detected": row.get("face_detected", "").strip().lower() == "true",
            }
        )
        if rid in by_id:
            raise PredictorError(f"protocol error: duplicate batch id {rid}")
        by_id[rid] = _parse_response(line, rid)

    samples = []
    for i, ref in enumerate(frames):
        if i not in by_id:
            raise PredictorError(
                f"batch predictor returned no response for id {i} "
                f"[{participant_id}/{condition}]",
                last_good_id=i - 1 if i else None,
            )
        samples.append(_response_to_sample(by_id[i], ref.frame_index))
    if len(by_id) != len(frames):
        raise PredictorError(
            f"batch predictor returned {len(by_id)} responses for {len(frames)} requests"
        )
    return AffectSequence(participant_id, condition, samples)
