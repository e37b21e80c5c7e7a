"""Adapter conformance against the primary toolkit's protocol checker.

These tests consume the toolkit only through its public surfaces: the
affect-predict/1 wire protocol and the bundled conformance checker.
"""

import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from affectbench.conformance import check_predictor_conformance

STUB_WEIGHTS = {
    "format": "facechannel-stub/1",
    "input_size": 48,
    # mean_lum in [0, 255] -> raw arousal in [-1, 1]
    "arousal": {"bias": -1.0, "mean_lum": 2.0 / 255.0},
    # std_lum up to 127.5 -> raw valence dips below -1, exercising the clamp
    "valence": {"bias": 1.0, "std_lum": -2.0 / 100.0},
}


@pytest.fixture
def stub_path(tmp_path):
    path = tmp_path / "stub_weights.json"
    path.write_text(json.dumps(STUB_WEIGHTS))
    return path


@pytest.fixture
def adapter_cmd(stub_path):
    return [
        sys.executable,
        "-m",
        "facechannel_adapter",
        "--model",
        str(stub_path),
        "--device",
        "cpu",
    ]


def save_png(path, array):
    Image.fromarray(array, mode="RGB").save(path)


class Session:
    """Minimal raw protocol driver (independent of the toolkit's client)."""

    def __init__(self, cmd):
        self.proc = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )

    def read(self):
        return json.loads(self.proc.stdout.readline())

    def request(self, request_id, frame_path):
        self.proc.stdin.write(json.dumps({"id": request_id, "frame_path": str(frame_path)}) + "\n")
        self.proc.stdin.flush()
        return self.read()

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=10)


def test_passes_primary_conformance_battery(adapter_cmd):
    report = check_predictor_conformance(adapter_cmd, request_count=100)
    assert report.passed, "\n".join(report.lines())


def test_handshake_first_then_id_echo(adapter_cmd, tmp_path):
    frame = tmp_path / "f.png"
    save_png(frame, np.random.default_rng(0).integers(0, 256, size=(32, 32, 3), dtype=np.uint8))
    session = Session(adapter_cmd)
    try:
        assert session.read() == {"protocol": "affect-predict/1"}
        for i in (0, 1, 5, 9):
            response = session.request(i, frame)
            assert response["id"] == i
            assert response["face_detected"] is True
            assert -1.0 <= response["arousal"] <= 1.0
            assert -1.0 <= response["valence"] <= 1.0
    finally:
        session.close()


def test_same_frame_twice_is_deterministic(adapter_cmd, tmp_path):
    frame = tmp_path / "f.png"
    save_png(frame, np.random.default_rng(1).integers(0, 256, size=(64, 48, 3), dtype=np.uint8))
    session = Session(adapter_cmd)
    try:
        session.read()
        first = session.request(0, frame)
        second = session.request(1, frame)
        assert (first["arousal"], first["valence"]) == (second["arousal"], second["valence"])
    finally:
        session.close()


def test_uniform_crop_reports_no_face(adapter_cmd, tmp_path):
    frame = tmp_path / "flat.png"
    save_png(frame, np.full((20, 20, 3), 70, dtype=np.uint8))
    session = Session(adapter_cmd)
    try:
        session.read()
        response = session.request(0, frame)
        assert response == {"id": 0, "arousal": None, "valence": None, "face_detected": False}
        # session survives and keeps answering
        noisy = tmp_path / "noisy.png"
        save_png(noisy, np.random.default_rng(2).integers(0, 256, size=(20, 20, 3), dtype=np.uint8))
        assert session.request(1, noisy)["face_detected"] is True
    finally:
        session.close()


def test_out_of_range_raw_scores_are_clamped(adapter_cmd, tmp_path):
    # pixel checkerboard of 0/255 drives std_lum high enough that the stub's
    # raw valence is far below -1
    arr = np.zeros((48, 48, 3), dtype=np.uint8)
    arr[::2, ::2] = 255
    arr[1::2, 1::2] = 255
    frame = tmp_path / "check.png"
    save_png(frame, arr)
    session = Session(adapter_cmd)
    try:
        session.read()
        response = session.request(0, frame)
        assert response["valence"] == -1.0
    finally:
        session.close()


def test_missing_weights_fail_before_handshake(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "facechannel_adapter", "--model", str(tmp_path / "none.json")],
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert result.returncode != 0
    assert result.stdout == ""  # no protocol bytes emitted
    assert "none.json" in result.stderr


def test_non_stub_json_rejected(tmp_path):
    weights = tmp_path / "other.json"
    weights.write_text(json.dumps({"format": "something-else/2"}))
    result = subprocess.run(
        [sys.executable, "-m", "facechannel_adapter", "--model", str(weights)],
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert result.returncode != 0
    assert "format" in result.stderr
