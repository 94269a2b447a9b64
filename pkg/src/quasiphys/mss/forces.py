"""Force laws for particle systems.

An internal law is called as ``law(p, q, t, pos, mass)`` and returns the force
that ``q`` exerts on ``p``. An external law is called as
``law(p, t, pos, mass)``. ``pos`` and ``mass`` map particle ids to positions
and masses at ``t``. The same objects drive both integration and validation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

ZERO = np.zeros(3)
_TIME_DIGITS = 9


def time_key(t: float) -> float:
    return round(float(t), _TIME_DIGITS)


class InternalLaw:
    name = "internal"

    def __call__(self, p, q, t, pos, mass) -> np.ndarray:
        raise NotImplementedError


class ExternalLaw:
    name = "external"

    def __call__(self, p, t, pos, mass) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroInternal(InternalLaw):
    name = "zero"

    def __call__(self, p, q, t, pos, mass):
        return ZERO.copy()


@dataclass(frozen=True)
class Gravity(InternalLaw):
    """Newtonian attraction, ``gamma m_p m_q (s_q - s_p) / |s_q - s_p|^3``."""

    gamma: float = 1.0
    name = "gravity"

    def __call__(self, p, q, t, pos, mass):
        if p == q:
            return ZERO.copy()
        d = pos[q] - pos[p]
        r = np.sqrt(d @ d)
        return self.gamma * mass[p] * mass[q] * d / r**3


@dataclass(frozen=True)
class Grouped(InternalLaw):
    """``base`` acting only between particles of the same group."""

    base: InternalLaw
    groups: Mapping

    def __call__(self, p, q, t, pos, mass):
        if self.groups[p] != self.groups[q]:
            return ZERO.copy()
        return self.base(p, q, t, pos, mass)


@dataclass(frozen=True)
class TabulatedInternal(InternalLaw):
    """Forces looked up by ``(p, q, time_key(t))``; missing entries are zero."""

    table: Mapping = field(default_factory=dict)
    name = "tabulated"

    def __call__(self, p, q, t, pos, mass):
        return np.asarray(self.table.get((p, q, time_key(t)), ZERO), dtype=float).copy()


@dataclass(frozen=True)
class FunctionInternal(InternalLaw):
    fn: Callable
    name = "function"

    def __call__(self, p, q, t, pos, mass):
        return np.asarray(self.fn(p, q, t, pos, mass), dtype=float)


@dataclass(frozen=True)
class Coupled(InternalLaw):
    """``base`` plus constant forces on selected ordered pairs."""

    base: InternalLaw
    pairs: Mapping

    def __call__(self, p, q, t, pos, mass):
        extra = self.pairs.get((p, q))
        out = self.base(p, q, t, pos, mass)
        return out if extra is None else out + extra


@dataclass(frozen=True)
class Resplit(InternalLaw):
    """``base`` plus ``c_pq(t) (s_p - s_q)`` with symmetric coefficients.

    The added term is antisymmetric and points along the line of centres, so
    it keeps both third-law axioms intact.
    """

    base: InternalLaw
    coeffs: Mapping  # frozenset({p, q}) -> callable(t) -> float

    def extra(self, p, q, t, pos):
        c = self.coeffs.get(frozenset((p, q)))
        if c is None or p == q:
            return ZERO.copy()
        return c(t) * (pos[p] - pos[q])

    def __call__(self, p, q, t, pos, mass):
        return self.base(p, q, t, pos, mass) + self.extra(p, q, t, pos)


@dataclass(frozen=True)
class ZeroExternal(ExternalLaw):
    name = "zero"

    def __call__(self, p, t, pos, mass):
        return ZERO.copy()


@dataclass(frozen=True)
class ConstantExternal(ExternalLaw):
    """Time-independent external force per particle (missing ids get zero)."""

    forces: Mapping
    name = "constant"

    @classmethod
    def uniform(cls, force, ids):
        f = np.asarray(force, dtype=float)
        return cls({p: f for p in ids})

    def __call__(self, p, t, pos, mass):
        return np.asarray(self.forces.get(p, ZERO), dtype=float).copy()


@dataclass(frozen=True)
class TabulatedExternal(ExternalLaw):
    table: Mapping = field(default_factory=dict)
    name = "tabulated"

    def __call__(self, p, t, pos, mass):
        return np.asarray(self.table.get((p, time_key(t)), ZERO), dtype=float).copy()


@dataclass(frozen=True)
class FunctionExternal(ExternalLaw):
    fn: Callable
    name = "function"

    def __call__(self, p, t, pos, mass):
        return np.asarray(self.fn(p, t, pos, mass), dtype=float)


@dataclass(frozen=True, eq=False)
class Absorbed(ExternalLaw):
    """External force plus the pull of particles dropped from a parent system."""

    parent: object
    dropped: tuple
    name = "absorbed"

    def __call__(self, p, t, pos, mass):
        out = self.parent.g(p, t)
        for q in self.dropped:
            out = out + self.parent.f(p, q, t)
        return out


@dataclass(frozen=True)
class Compensated(ExternalLaw):
    """``base`` minus the extra internal terms of a :class:`Resplit` law."""

    base: ExternalLaw
    resplit: Resplit
    ids: tuple

    def __call__(self, p, t, pos, mass):
        out = self.base(p, t, pos, mass)
        for q in self.ids:
            out = out - self.resplit.extra(p, q, t, pos)
        return out
