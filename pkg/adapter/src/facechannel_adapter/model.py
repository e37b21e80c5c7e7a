"""Model backends: the real FaceChannel, or a stub for protocol testing.

A stub weights file is JSON:

    {
      "format": "facechannel-stub/1",
      "input_size": 96,
      "arousal": {"bias": -1.0, "mean_lum": 0.00784313725},
      "valence": {"bias": 1.0, "std_lum": -0.015625}
    }

The stub scores a resized face crop linearly from two luminance features
(mean and population standard deviation) and reports "no face" on a
perfectly uniform crop.  Raw scores are clamped to [-1, 1] downstream.

Any other model source is handed to the FaceChannel package, imported
lazily so the adapter installs without deep-learning dependencies; loading
happens before the protocol handshake, so a missing or broken model exits
non-zero without emitting any protocol bytes.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

STUB_FORMAT = "facechannel-stub/1"


class ModelLoadError(Exception):
    pass


@dataclass(frozen=True)
class AdapterConfig:
    model_source: Path
    device: str = "cpu"
    input_size: int | None = None

    def __post_init__(self):
        if self.device not in ("cpu", "accelerator"):
            raise ModelLoadError(f"unknown device {self.device!r} (use cpu or accelerator)")


class StubModel:
    """Deterministic linear scorer over luminance features."""

    def __init__(self, spec: dict):
        self.input_size = int(spec["input_size"])
        if self.input_size <= 0:
            raise ModelLoadError(f"stub input_size must be positive, got {self.input_size}")
        self._arousal = spec["arousal"]
        self._valence = spec["valence"]

    def _score(self, head: dict, features: dict) -> float:
        value = float(head.get("bias", 0.0))
        for name, coefficient in head.items():
            if name != "bias":
                value += float(coefficient) * features[name]
        return value

    def predict(self, image: np.ndarray) -> tuple[float, float] | None:
        lum = image.astype(np.float64).mean(axis=2)
        spread = float(lum.std())
        if spread == 0.0:
            return None  # nothing face-like in a uniform crop
        features = {"mean_lum": float(lum.mean()), "std_lum": spread}
        return self._score(self._arousal, features), self._score(self._valence, features)


class FaceChannelModel:
    """Thin binding to the upstream FaceChannel package."""

    def __init__(self, source: Path, device: str, input_size: int | None):
        try:
            from facechannel import FaceChannel  # deferred heavy import
        except ImportError as e:
            raise ModelLoadError(
                f"cannot load {source}: the facechannel package is not installed "
                f"(pip install facechannel), and the file is not a stub weights JSON"
            ) from e
        # best-effort deterministic inference
        random.seed(0)
        np.random.seed(0)
        self._model = FaceChannel("Dimensional", loadModel=True)
        self.input_size = input_size or 64
        self._device = device

    def predict(self, image: np.ndarray) -> tuple[float, float] | None:
        outputs = self._model.predict(image, preprocess=True)
        if not outputs:
            return None
        arousal, valence = float(outputs[0][0]), float(outputs[0][1])
        return arousal, valence


def load_model(config: AdapterConfig):
    source = Path(config.model_source)
    if not source.exists():
        raise ModelLoadError(f"model source {source} does not exist")
    if source.suffix == ".json":
        try:
            spec = json.loads(source.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ModelLoadError(f"cannot read stub weights {source}: {e}") from e
        if spec.get("format") != STUB_FORMAT:
            raise ModelLoadError(
                f"{source}: unknown weights format {spec.get('format')!r} (expected {STUB_FORMAT})"
            )
        try:
            model = StubModel(spec)
        except (KeyError, TypeError, ValueError) as e:
            raise ModelLoadError(f"{source}: malformed stub weights: {e}") from e
        if config.input_size:
            raise ModelLoadError("input_size is fixed by the stub weights file")
        return model
    return FaceChannelModel(source, config.device, config.input_size)
