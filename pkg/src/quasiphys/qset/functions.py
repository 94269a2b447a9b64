"""Quasi-functions: finite mappings that respect indistinguishability."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import QSet, element_of, indist


@dataclass(frozen=True)
class Violation:
    first: tuple
    second: tuple


@dataclass(frozen=True)
class CongruenceReport:
    ok: bool
    witness: Optional[Violation] = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class QuasiFunction:
    pairs: tuple
    domain: Optional[QSet] = None
    codomain: Optional[QSet] = None

    def __post_init__(self):
        object.__setattr__(
            self, "pairs", tuple((element_of(a), element_of(b)) for a, b in self.pairs)
        )

    def __call__(self, x):
        """Image of ``x``: the output of any pair whose input is indistinguishable from ``x``."""
        for a, b in self.pairs:
            if indist(a, x):
                return b
        raise KeyError(f"{x!r} is outside the domain")


def validate_qf(f: QuasiFunction) -> CongruenceReport:
    """Check that indistinguishable inputs are sent to indistinguishable outputs."""
    pairs = f.pairs
    for i, (a1, b1) in enumerate(pairs):
        for a2, b2 in pairs[i + 1:]:
            if indist(a1, a2) and not indist(b1, b2):
                return CongruenceReport(False, Violation((a1, b1), (a2, b2)))
    return CongruenceReport(True)
