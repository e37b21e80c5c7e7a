"""The affect-predict/1 request loop.

The handshake is emitted only after the model has loaded; per-frame read
failures and model "no face" results both answer face_detected=false with
null values (plus a diagnostic on stderr) so one bad frame never kills the
session.
"""

from __future__ import annotations

import json
import sys

import numpy as np
from PIL import Image

from .model import AdapterConfig, ModelLoadError, load_model

PROTOCOL_ID = "affect-predict/1"


def _clamp(value: float) -> float:
    return min(1.0, max(-1.0, float(value)))


def _load_resized(path: str, size: int) -> np.ndarray:
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        if rgb.size != (size, size):
            rgb = rgb.resize((size, size), Image.BILINEAR)
        return np.asarray(rgb)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def serve(config: AdapterConfig) -> int:
    try:
        model = load_model(config)
    except ModelLoadError as e:
        print(f"facechannel-adapter: {e}", file=sys.stderr)
        return 1

    _emit({"protocol": PROTOCOL_ID})
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            request_id = request["id"]
            frame_path = request["frame_path"]
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            print(f"facechannel-adapter: unreadable request {line!r}: {e}", file=sys.stderr)
            continue

        arousal = valence = None
        try:
            image = _load_resized(frame_path, model.input_size)
        except (OSError, ValueError) as e:
            print(f"facechannel-adapter: cannot read {frame_path}: {e}", file=sys.stderr)
        else:
            prediction = model.predict(image)
            if prediction is None:
                print(f"facechannel-adapter: no face in {frame_path}", file=sys.stderr)
            else:
                arousal, valence = _clamp(prediction[0]), _clamp(prediction[1])

        _emit(
            {
                "id": request_id,
                "arousal": arousal,
                "valence": valence,
                "face_detected": arousal is not None,
            }
        )
    return 0
