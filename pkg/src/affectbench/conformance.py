"""Reusable conformance checker for affect-predict/1 predictors.

Drives a predictor command through a fixed battery of checks (handshake,
id echo over many frames, value ranges, invalid-face behavior, repeat
determinism) against generated fixture frames.  Adapter authors can run it
directly:

    python -m affectbench.conformance -- my-adapter --model weights --device cpu
"""

from __future__ import annotations

import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bridge import DEFAULT_TIMEOUT, PredictorSession
from .errors import PredictorError
from .frames import Frame, save_frame


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ConformanceReport:
    command: list[str]
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            detail = f" - {c.detail}" if c.detail else ""
            out.append(f"{status} {c.name}{detail}")
        return out


def _fixture_frames(directory: Path, count: int = 8) -> list[Path]:
    paths = []
    for i in range(count):
        arr = np.zeros((32, 32, 3), dtype=np.uint8)
        arr[:, :] = (i * 29) % 256
        arr[8:24, 8:24] = 255 - ((i * 53) % 256)
        path = directory / f"fixture_{i:03d}.png"
        save_frame(Frame(arr), path)
        paths.append(path)
    return paths


def check_predictor_conformance(
    command: Sequence[str],
    *,
    request_count: int = 100,
    timeout: float = DEFAULT_TIMEOUT,
) -> ConformanceReport:
    """Run the conformance battery; the report lists one result per check."""
    report = ConformanceReport(command=list(command))

    with tempfile.TemporaryDirectory(prefix="affectbench-conformance-") as tmp:
        frames = _fixture_frames(Path(tmp))
        missing = Path(tmp) / "no_such_frame.png"

        try:
            session = PredictorSession(command, timeout=timeout)
        except PredictorError as e:
            report.checks.append(CheckResult("handshake", False, str(e)))
            return report
        report.checks.append(CheckResult("handshake", True, "affect-predict/1 emitted first"))

        try:
            with session:
                responses = []
                ok = True
                detail = f"{request_count} requests echoed in order"
                for i in range(request_count):
                    response = session.request(i, str(frames[i % len(frames)]))
                    responses.append(response)
                    if response.id != i:
                        ok = False
                        detail = f"id {response.id} returned for request {i}"
                        break
                report.checks.append(CheckResult("id_bijection", ok, detail))

                in_range = all(
                    r.arousal is None or -1.0 <= r.arousal <= 1.0 for r in responses
                ) and all(r.valence is None or -1.0 <= r.valence <= 1.0 for r in responses)
                report.checks.append(
                    CheckResult(
                        "range_validation",
                        in_range,
                        "all emitted values within [-1, 1]" if in_range else "out-of-range value seen",
                    )
                )

                next_id = request_count
                invalid = session.request(next_id, str(missing))
                ok = not invalid.face_detected and invalid.arousal is None and invalid.valence is None
                # the session must survive an unreadable frame
                follow_up = session.request(next_id + 1, str(frames[0]))
                ok = ok and follow_up.id == next_id + 1
                report.checks.append(
                    CheckResult(
                        "invalid_face_handling",
                        ok,
                        "face_detected=false with null values, session continued"
                        if ok
                        else "bad response to unreadable frame",
                    )
                )

                first = session.request(next_id + 2, str(frames[3]))
                second = session.request(next_id + 3, str(frames[3]))
                deterministic = (
                    first.face_detected == second.face_detected
                    and first.arousal == second.arousal
                    and first.valence == second.valence
                )
                report.checks.append(
                    CheckResult(
                        "determinism",
                        deterministic,
                        "identical outputs for a repeated frame"
                        if deterministic
                        else f"({first.arousal}, {first.valence}) != ({second.arousal}, {second.valence})",
                    )
                )
        except PredictorError as e:
            report.checks.append(CheckResult("protocol", False, str(e)))

    return report


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] == "--":
        argv = argv[1:]
    if not argv:
        print("usage: python -m affectbench.conformance -- COMMAND [ARGS...]", file=sys.stderr)
        return 2
    report = check_predictor_conformance(argv)
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
