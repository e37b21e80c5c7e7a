"""The five image-degradation operators: lighter, darker, gaussian, noise, motion.

Every operator is a pure function of its inputs: output dimensions equal
input dimensions, channels stay in [0, 255], and the noise operator is
keyed by an explicit seed through the counter-based stream in `rng`, so
results are bit-identical regardless of worker count or evaluation order.

Rounding rule (applied once, at output): round half away from zero, which
on the non-negative values here is floor(x + 0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .errors import ValidationError
from .frames import Frame

CONDITION_KINDS = ("lighter", "darker", "gaussian", "noise", "motion")

DEFAULT_GAIN_LIGHTER = 1.3
DEFAULT_GAIN_DARKER = 0.7
DEFAULT_SIGMA = 1.0
DEFAULT_FLIP_PROBABILITY = 0.01
DEFAULT_SHIFT = 10

_SEED_MAX = (1 << 64) - 1

# parameter name -> kinds it applies to
_RELEVANT = {
    "gain": ("lighter", "darker"),
    "sigma": ("gaussian",),
    "flip_probability": ("noise",),
    "shift": ("motion",),
    "seed": ("noise",),
}


def _round_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


@dataclass(frozen=True)
class CorruptionSpec:
    """One reproducible degradation: a kind plus exactly its own parameters.

    Fields irrelevant to `kind` must stay None; missing relevant fields are
    filled with the documented defaults.  `seed` (noise only) may be left
    None in manifests, in which case the study harness derives it from the
    study seed and participant id.
    """

    kind: str
    gain: float | None = None
    sigma: float | None = None
    flip_probability: float | None = None
    shift: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ValidationError(
                f"unknown corruption kind {self.kind!r}; expected one of {CONDITION_KINDS}"
            )
        for name, kinds in _RELEVANT.items():
            value = getattr(self, name)
            if value is not None and self.kind not in kinds:
                raise ValidationError(f"parameter {name!r} is not valid for kind {self.kind!r}")
        if self.kind == "lighter" and self.gain is None:
            object.__setattr__(self, "gain", DEFAULT_GAIN_LIGHTER)
        if self.kind == "darker" and self.gain is None:
            object.__setattr__(self, "gain", DEFAULT_GAIN_DARKER)
        if self.kind == "gaussian" and self.sigma is None:
            object.__setattr__(self, "sigma", DEFAULT_SIGMA)
        if self.kind == "noise" and self.flip_probability is None:
            object.__setattr__(self, "flip_probability", DEFAULT_FLIP_PROBABILITY)
        if self.kind == "motion" and self.shift is None:
            object.__setattr__(self, "shift", DEFAULT_SHIFT)
        if self.gain is not None and self.gain <= 0:
            raise ValidationError(f"gain must be positive, got {self.gain}")
        if self.sigma is not None and self.sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if self.flip_probability is not None and not 0.0 <= self.flip_probability <= 1.0:
            raise ValidationError(
                f"flip_probability must lie in [0, 1], got {self.flip_probability}"
            )
        if self.shift is not None and (self.shift < 0 or self.shift != int(self.shift)):
            raise ValidationError(f"shift must be a non-negative integer, got {self.shift}")
        if self.seed is not None and not 0 <= self.seed <= _SEED_MAX:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def from_dict(cls, obj: dict) -> "CorruptionSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError(f"corruption spec must be an object with a 'kind': {obj!r}")
        known = {"kind", *_RELEVANT}
        extra = set(obj) - known
        if extra:
            raise ValidationError(f"unknown corruption parameters {sorted(extra)} for {obj['kind']!r}")
        return cls(**obj)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for name in _RELEVANT:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    def with_seed(self, seed: int) -> "CorruptionSpec":
        return replace(self, seed=seed) if self.kind == "noise" else self


def adjust_brightness(frame: Frame, gain: float) -> Frame:
    """Multiply every channel by `gain`, then round and clamp to [0, 255]."""
    if gain <= 0:
        raise ValidationError(f"gain must be positive, got {gain}")
    return Frame(_round_u8(frame.pixels.astype(np.float64) * gain))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1D Gaussian taps k[i] ~ exp(-i^2 / 2 sigma^2), i in [-r, r], r = ceil(3 sigma)."""
    if sigma <= 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(frame: Frame, sigma: float) -> Frame:
    """Separable Gaussian filter with clamp-to-edge borders.

    Channels are filtered independently in float64; rounding and clamping
    happen once, on the final result.
    """
    kernel = gaussian_kernel(sigma)
    radius = (len(kernel) - 1) // 2
    arr = frame.pixels.astype(np.float64)
    h, w = arr.shape[:2]

    padded = np.pad(arr, ((0, 0), (radius, radius), (0, 0)), mode="edge")
    horiz = np.zeros_like(arr)
    for i, weight in enumerate(kernel):
        horiz += weight * padded[:, i : i + w, :]

    padded = np.pad(horiz, ((radius, radius), (0, 0), (0, 0)), mode="edge")
    out = np.zeros_like(arr)
    for i, weight in enumerate(kernel):
        out += weight * padded[i : i + h, :, :]

    return Frame(_round_u8(out))


def salt_pepper(frame: Frame, flip_probability: float, seed: int) -> Frame:
    """Impulse noise: each pixel flips to pure white or pure black.

    Pixel p (row-major index) draws u1 at counter 2p and u2 at counter
    2p + 1 from the stream keyed by `seed`; it flips when
    u1 < flip_probability, to white when u2 < 0.5 and black otherwise.
    All three channels change jointly.
    """
    if not 0.0 <= flip_probability <= 1.0:
        raise ValidationError(f"flip_probability must lie in [0, 1], got {flip_probability}")
    h, w = frame.height, frame.width
    n = h * w
    counters = np.arange(n, dtype=np.uint64) * np.uint64(2)
    u1 = rng.uniforms(seed, counters)
    u2 = rng.uniforms(seed, counters + np.uint64(1))
    flip = u1 < flip_probability
    out = frame.pixels.reshape(n, 3).copy()
    out[flip & (u2 < 0.5)] = 255
    out[flip & (u2 >= 0.5)] = 0
    return Frame(out.reshape(h, w, 3))


def horizontal_motion(frame: Frame, shift: int) -> Frame:
    """Translate content right by `shift` pixels, replicating the left edge."""
    if shift < 0:
        raise ValidationError(f"shift must be non-negative, got {shift}")
    w = frame.width
    src_cols = np.clip(np.arange(w) - int(shift), 0, w - 1)
    return Frame(frame.pixels[:, src_cols, :])


def apply(frame: Frame, spec: CorruptionSpec, frame_index: int) -> Frame:
    """Dispatch to the operator for `spec.kind`.

    For noise, the effective seed is derive(spec.seed, frame_index), so each
    frame gets an independent but reproducible stream.
    """
    if spec.kind in ("lighter", "darker"):
        return adjust_brightness(frame, spec.gain)
    if spec.kind == "gaussian":
        return gaussian_blur(frame, spec.sigma)
    if spec.kind == "noise":
        if spec.seed is None:
            raise ValidationError("noise spec has no seed; set one or run through the harness")
        return salt_pepper(frame, spec.flip_probability, rng.derive_seed(spec.seed, frame_index))
    if spec.kind == "motion":
        return horizontal_motion(frame, spec.shift)
    raise ValidationError(f"unknown corruption kind {spec.kind!r}")
