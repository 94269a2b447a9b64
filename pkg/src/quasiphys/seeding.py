"""Deterministic seed derivation and counter-mode uniform streams.

Every random draw in the package comes from a BLAKE2b hash of a seed and a
counter, so a trial's randomness depends only on (master seed, trial index)
and never on scheduling.
"""
from __future__ import annotations

from hashlib import blake2b

import numpy as np

SEED_BITS = 64
_SEED_BYTES = 16
_MASK = (1 << (8 * _SEED_BYTES)) - 1


def _encode(x: int) -> bytes:
    return (int(x) & _MASK).to_bytes(_SEED_BYTES, "little")


def seed_split(master: int, index: int) -> int:
    """64-bit sub-seed for ``index`` derived from ``master``."""
    if master < 0 or index < 0:
        raise ValueError("seeds and indices are unsigned")
    digest = blake2b(_encode(master) + _encode(index), digest_size=8, person=b"qp-split").digest()
    return int.from_bytes(digest, "little")


def _to_unit(word: int) -> float:
    # top 53 bits give an exactly representable float in [0, 1)
    return (word >> 11) * 2.0**-53


class HashStream:
    """Uniform floats in [0, 1) from BLAKE2b(seed, counter)."""

    __slots__ = ("seed", "counter", "_key")

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be unsigned")
        self.seed = int(seed)
        self.counter = 0
        self._key = _encode(seed)

    def random(self) -> float:
        digest = blake2b(self._key + self.counter.to_bytes(8, "little"), digest_size=8, person=b"qp-draw").digest()
        self.counter += 1
        return _to_unit(int.from_bytes(digest, "little"))


def trial_draws(master: int, start: int, stop: int, per_trial: int) -> np.ndarray:
    """Draws for trials ``start..stop-1``, row ``i`` equal to ``per_trial`` calls of
    ``HashStream(seed_split(master, start + i)).random()``."""
    out = np.empty((stop - start, per_trial))
    for row, index in enumerate(range(start, stop)):
        stream = HashStream(seed_split(master, index))
        for col in range(per_trial):
            out[row, col] = stream.random()
    return out
