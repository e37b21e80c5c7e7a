"""Frames, bounding boxes, and lossless 8-bit RGB image I/O.

A Frame wraps an immutable (height, width, 3) uint8 array.  Supported file
formats are PNG (via Pillow; RGBA alpha dropped, grayscale promoted by
channel replication) and binary PPM (P6, maxval 255).  Round trips are
bit-exact for both formats.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FrameDecodeError, ValidationError

# Pillow modes we can promote losslessly to 8-bit RGB.
_PROMOTABLE_MODES = {"RGB", "RGBA", "L", "LA", "P"}


class Frame:
    """Immutable 8-bit RGB raster."""

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray):
        arr = np.asarray(pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValidationError(f"frame pixels must have shape (h, w, 3), got {arr.shape}")
        if arr.dtype != np.uint8:
            raise ValidationError(f"frame pixels must be uint8, got {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("frame must have positive width and height")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Frame is immutable")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Frame({self.width}x{self.height})"

    @classmethod
    def filled(cls, width: int, height: int, color=(0, 0, 0)) -> "Frame":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:, :] = color
        return cls(arr)


@dataclass(frozen=True)
class BoundingBox:
    """Face region in pixel coordinates; (x, y) is the top-left corner."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"bounding box origin must be non-negative, got ({self.x}, {self.y})")
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"bounding box size must be positive, got {self.w}x{self.h}")

    @classmethod
    def full(cls, frame: Frame) -> "BoundingBox":
        return cls(0, 0, frame.width, frame.height)


@dataclass(frozen=True)
class FrameRef:
    """One frame of a participant's sequence, identified by temporal index."""

    participant_id: str
    frame_index: int
    source_path: Path


def crop(frame: Frame, box: BoundingBox) -> Frame:
    """Extract the box region; raises ValidationError if it leaves the frame."""
    if box.x + box.w > frame.width or box.y + box.h > frame.height:
        raise ValidationError(
            f"bounding box {box} exceeds frame bounds {frame.width}x{frame.height}"
        )
    return Frame(frame.pixels[box.y : box.y + box.h, box.x : box.x + box.w])


def load_frame(path: str | Path) -> Frame:
    """Decode a PNG or binary PPM file into a Frame.

    Raises FrameDecodeError (with path and reason) for unreadable files,
    unsupported bit depths, or unsupported color models.
    """
    path = Path(path)
    try:
        head = path.open("rb").read(2)
    except OSError as e:
        raise FrameDecodeError(path, f"unreadable file: {e}") from e
    if head == b"P6":
        return _load_ppm(path)
    return _load_png(path)


def _load_png(path: Path) -> Frame:
    try:
        with Image.open(path) as img:
            mode = img.mode
            if mode not in _PROMOTABLE_MODES:
                raise FrameDecodeError(path, f"unsupported bit depth or color model: mode {mode!r}")
            if mode == "P":
                img = img.convert("RGB")
                mode = "RGB"
            arr = np.asarray(img)
    except FrameDecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise FrameDecodeError(path, f"decode failed: {e}") from e
    if mode in ("RGBA", "LA"):
        arr = arr[..., :-1]
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, np.newaxis], 3, axis=2)
    if arr.dtype != np.uint8:
        raise FrameDecodeError(path, f"unsupported bit depth: {arr.dtype}")
    return Frame(arr)


def _load_ppm(path: Path) -> Frame:
    try:
        data = path.read_bytes()
    except OSError as e:
        raise FrameDecodeError(path, f"unreadable file: {e}") from e
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FrameDecodeError(path, "truncated PPM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P6":
        raise FrameDecodeError(path, f"unsupported PPM magic {magic!r} (only binary P6)")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as e:
        raise FrameDecodeError(path, f"malformed PPM header: {e}") from e
    if width <= 0 or height <= 0:
        raise FrameDecodeError(path, f"invalid PPM dimensions {width}x{height}")
    if maxval != 255:
        raise FrameDecodeError(path, f"unsupported bit depth: maxval {maxval} (only 255)")
    pos += 1  # single whitespace byte separates header from raster
    raster = data[pos : pos + width * height * 3]
    if len(raster) < width * height * 3:
        raise FrameDecodeError(path, "truncated PPM raster")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return Frame(arr)


def save_frame(frame: Frame, path: str | Path) -> None:
    """Write a frame as PNG or binary PPM, chosen by file extension."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    if suffix == ".png":
        Image.fromarray(frame.pixels, mode="RGB").save(path, format="PNG")
    elif suffix in (".ppm", ".pnm"):
        header = b"P6\n%d %d\n255\n" % (frame.width, frame.height)
        path.write_bytes(header + frame.pixels.tobytes())
    else:
        raise ValidationError(f"unsupported output format {suffix!r} (use .png or .ppm)")
