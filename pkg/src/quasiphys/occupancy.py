"""Counting ways to place n particles into k one-particle states."""
from __future__ import annotations

import enum
import math

from .errors import INT_LIMIT


class Mode(enum.Enum):
    INDIVIDUALS = "individuals"
    NON_INDIVIDUALS = "non-individuals"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"individuals": cls.INDIVIDUALS, "nonindividuals": cls.NON_INDIVIDUALS, "non-individuals": cls.NON_INDIVIDUALS}
        if key not in aliases:
            raise ValueError(f"unknown counting mode {value!r}")
        return aliases[key]


def count_configurations(n: int, k: int, mode) -> int:
    """Labelled assignments ``k**n`` or occupancy vectors ``C(n + k - 1, n)``.

    Raises OverflowError when the count leaves the signed 64-bit range.
    """
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    mode = Mode.parse(mode)
    count = k**n if mode is Mode.INDIVIDUALS else math.comb(n + k - 1, n)
    if count > INT_LIMIT:
        raise OverflowError(f"{count.bit_length()}-bit count exceeds int64")
    return count
