"""Separation predicates.

The algebra is closed on purpose: every atom looks only at data shared by
all members of an indistinguishability class (species, macro id, whether the
member is a collection and its quasi-cardinal). Any predicate built from these
therefore gives the same verdict on indistinguishable members.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import Collection, MacroAtom, MicroAtom, Species, element_of, qc


class Predicate:
    def __call__(self, el) -> bool:
        return self.holds(element_of(el))

    def holds(self, el) -> bool:
        raise NotImplementedError

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class SpeciesIs(Predicate):
    species: Species

    def __post_init__(self):
        if not isinstance(self.species, Species):
            object.__setattr__(self, "species", Species(self.species))

    def holds(self, el):
        return isinstance(el, MicroAtom) and el.species == self.species


@dataclass(frozen=True)
class MacroIdIs(Predicate):
    id: str

    def holds(self, el):
        return isinstance(el, MacroAtom) and el.id == self.id


@dataclass(frozen=True)
class IsCollection(Predicate):
    def holds(self, el):
        return isinstance(el, Collection)


@dataclass(frozen=True)
class QcEquals(Predicate):
    n: int

    def holds(self, el):
        return isinstance(el, Collection) and qc(el.q) == self.n


@dataclass(frozen=True)
class QcAtMost(Predicate):
    n: int

    def holds(self, el):
        return isinstance(el, Collection) and qc(el.q) <= self.n


@dataclass(frozen=True)
class Const(Predicate):
    value: bool

    def holds(self, el):
        return self.value


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class And(Predicate):
    left: Predicate
    right: Predicate

    def holds(self, el):
        return self.left.holds(el) and self.right.holds(el)


@dataclass(frozen=True)
class Or(Predicate):
    left: Predicate
    right: Predicate

    def holds(self, el):
        return self.left.holds(el) or self.right.holds(el)


@dataclass(frozen=True)
class Not(Predicate):
    inner: Predicate

    def holds(self, el):
        return not self.inner.holds(el)
