"""Run ledger: content-addressed stage skipping.

Each pipeline stage records a fingerprint of its inputs and parameters
(content hashes, never timestamps).  A stage re-runs iff that fingerprint
changed, so repeated invocations of an unchanged study perform no writes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

LEDGER_FILENAME = "ledger.json"


def fingerprint(payload) -> str:
    """SHA-256 over the canonical JSON encoding of a parameter block."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def hash_tree(root: Path, pattern: str = "**/*") -> str:
    """Digest of (relative path, content hash) over all files under root."""
    digest = hashlib.sha256()
    if root.is_dir():
        for path in sorted(p for p in root.glob(pattern) if p.is_file()):
            digest.update(str(path.relative_to(root)).encode("utf-8"))
            digest.update(b"\0")
            digest.update(hash_file(path).encode("ascii"))
            digest.update(b"\n")
    return digest.hexdigest()


class RunLedger:
    def __init__(self, path: Path, stages: dict[str, str]):
        self.path = path
        self.stages = stages

    @classmethod
    def load(cls, out_dir: Path) -> "RunLedger":
        path = Path(out_dir) / LEDGER_FILENAME
        stages: dict[str, str] = {}
        if path.exists():
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
                if isinstance(data.get("stages"), dict):
                    stages = dict(data["stages"])
            except (json.JSONDecodeError, OSError):
                stages = {}  # unreadable ledger: treat every stage as stale
        return cls(path, stages)

    def is_current(self, stage: str, fp: str) -> bool:
        return self.stages.get(stage) == fp

    def record(self, stage: str, fp: str) -> None:
        self.stages[stage] = fp
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps({"stages": self.stages}, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        tmp.replace(self.path)
