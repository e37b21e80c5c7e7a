"""Counter-based deterministic random stream.

The noise operator must give bit-identical results no matter how frames or
pixel blocks are partitioned across workers, so random values are a pure
function of (seed, counter) instead of a stateful generator.  The stream is
the splitmix64 sequence (Steele et al.):

    value(seed, i) = finalize(seed + (i + 1) * GOLDEN)  mod 2**64

with the standard xor-shift/multiply finalizer.  Constants and the
uint64 -> [0, 1) conversion (take the top 53 bits) are fixed; any change
invalidates recorded golden outputs.

Seeds for sub-streams (per participant, per frame) are derived by folding
components into the seed one at a time; strings are folded through an
8-byte BLAKE2b digest so the result is stable across platforms and runs.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_MIX1 = np.uint64(_MIX1)
_U64_MIX2 = np.uint64(_MIX2)
_INV_2_53 = float(2.0**-53)


def _finalize_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def value_at(seed: int, counter: int) -> int:
    """The uint64 stream element at `counter` for the given seed."""
    return _finalize_int((seed + (counter + 1) * _GOLDEN) & _MASK)


def uniform_at(seed: int, counter: int) -> float:
    """Uniform [0, 1) draw at a single counter position."""
    return (value_at(seed, counter) >> 11) * _INV_2_53


def uniforms(seed: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized uniform [0, 1) draws at the given counter positions.

    Bit-identical to calling `uniform_at` per element; uint64 arithmetic
    wraps modulo 2**64 by construction.
    """
    z = np.asarray(counters, dtype=np.uint64)
    z = np.uint64(seed & _MASK) + (z + np.uint64(1)) * _U64_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _U64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U64_MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


def _component(part: int | str) -> int:
    if isinstance(part, str):
        digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")
    return int(part) & _MASK


def derive_seed(seed: int, *parts: int | str) -> int:
    """Fold components (ints or strings) into `seed` to key a sub-stream.

    Left-associative, so derive(s, a, b) == derive(derive(s, a), b).
    """
    state = seed & _MASK
    for part in parts:
        state = _finalize_int(((state ^ _component(part)) + _GOLDEN) & _MASK)
    return state
