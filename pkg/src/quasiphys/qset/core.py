"""Finite quasi-sets over micro-atoms, macro-atoms and nested collections.

Micro-atoms carry no handle of their own. A quasi-set only records how many
micro-atoms of each species it holds, so nothing in this module can ask which
electron is which. Macro-atoms behave like ordinary urelements and keep their
ids. Nested quasi-sets are stored once per indistinguishability class together
with a multiplicity.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from ..errors import INT_LIMIT, CapacityExceeded, IllFormed, NotPure, TooLarge

# bound on copies of one nested class; keeps enumeration tractable
MAX_MULTIPLICITY = 64
ENUMERATION_LIMIT = 12


@dataclass(frozen=True, order=True)
class Species:
    label: str

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise ValueError("species label must be a non-empty string")

    def __str__(self):
        return self.label


@dataclass(frozen=True, eq=False)
class MicroAtom:
    """An m-atom, known only through its species.

    Equality is not a formula for m-atoms, so ``==`` raises instead of
    answering. Use :func:`indist` to compare.
    """

    species: Species

    def __eq__(self, other):
        raise IllFormed("'=' is not defined on micro-atoms; use indist()")

    def __ne__(self, other):
        raise IllFormed("'=' is not defined on micro-atoms; use indist()")

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class MacroAtom:
    id: str


@dataclass(frozen=True)
class Collection:
    q: "QSet"


Element = Union[MicroAtom, MacroAtom, Collection]


def _species(s) -> Species:
    return s if isinstance(s, Species) else Species(s)


@dataclass(frozen=True, eq=False)
class QSet:
    """Immutable finite quasi-set.

    ``micro`` maps species to counts, ``macro`` holds macro-atom ids and
    ``subs`` holds ``(representative, multiplicity)`` pairs whose
    representatives are pairwise non-indistinguishable. Use :func:`qset` to
    build one from loose parts; it merges indistinguishable nested members.
    """

    micro: tuple = ()
    macro: frozenset = frozenset()
    subs: tuple = ()
    _key: tuple = field(init=False, repr=False)
    _counts: dict = field(init=False, repr=False)

    def __post_init__(self):
        micro = []
        seen = set()
        for sp, count in self.micro:
            sp = _species(sp)
            if sp in seen:
                raise ValueError(f"species {sp.label!r} listed twice")
            if not isinstance(count, int) or count < 1:
                raise ValueError(f"count for {sp.label!r} must be a positive integer")
            seen.add(sp)
            micro.append((sp, count))
        micro.sort(key=lambda item: item[0].label)
        object.__setattr__(self, "micro", tuple(micro))
        object.__setattr__(self, "_counts", {sp.label: c for sp, c in micro})
        object.__setattr__(self, "macro", frozenset(str(m) for m in self.macro))

        subs = tuple((rep, mult) for rep, mult in self.subs)
        for i, (rep, mult) in enumerate(subs):
            if not isinstance(rep, QSet):
                raise TypeError("nested members must be QSet instances")
            if not isinstance(mult, int) or not 1 <= mult <= MAX_MULTIPLICITY:
                raise ValueError(f"multiplicity must lie in [1, {MAX_MULTIPLICITY}]")
            if mult > 1 and not rep.has_micro:
                # an m-atom-free quasi-set is a set; its copies are identical
                raise ValueError("an m-atom-free nested set cannot appear more than once")
            if any(weak_ext_indist(rep, other) for other, _ in subs[:i]):
                raise ValueError("nested representatives must be pairwise non-indistinguishable")
        object.__setattr__(self, "subs", subs)
        self._seal()

    def _seal(self):
        object.__setattr__(
            self,
            "_key",
            (
                tuple((sp.label, c) for sp, c in self.micro),
                tuple(sorted(self.macro)),
                tuple(sorted((rep._key, m) for rep, m in self.subs)),
            ),
        )

    @classmethod
    def _trusted(cls, micro: tuple, macro: frozenset, subs: tuple) -> "QSet":
        # parts taken from an already validated quasi-set; skips re-validation
        q = object.__new__(cls)
        object.__setattr__(q, "micro", micro)
        object.__setattr__(q, "_counts", {sp.label: c for sp, c in micro})
        object.__setattr__(q, "macro", macro)
        object.__setattr__(q, "subs", subs)
        q._seal()
        return q

    # extensional equality between quasi-sets
    def __eq__(self, other):
        if not isinstance(other, QSet):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        parts = [f"{sp.label}x{c}" for sp, c in self.micro]
        parts += sorted(self.macro)
        parts += [f"{rep!r}x{m}" if m > 1 else repr(rep) for rep, m in self.subs]
        return "[" + ", ".join(parts) + "]"

    @property
    def has_micro(self) -> bool:
        """True when the transitive closure contains an m-atom."""
        return bool(self.micro) or any(rep.has_micro for rep, _ in self.subs)

    @property
    def is_pure(self) -> bool:
        return not self.macro and not self.subs

    @property
    def depth(self) -> int:
        return max((rep.depth + 1 for rep, _ in self.subs), default=0)

    def count_of(self, species) -> int:
        return self._counts.get(_species(species).label, 0)

    def classes(self) -> tuple[tuple[Element, int], ...]:
        """One ``(representative, count)`` per indistinguishability class."""
        cached = self.__dict__.get("_classes")
        if cached is None:
            cached = tuple(
                [(MicroAtom(sp), c) for sp, c in self.micro]
                + [(MacroAtom(m), 1) for m in sorted(self.macro)]
                + [(Collection(rep), mult) for rep, mult in self.subs]
            )
            object.__setattr__(self, "_classes", cached)
        return cached


EMPTY = QSet()


def qset(micro: Mapping | Iterable | None = None, macro: Iterable = (), subs: Iterable = ()) -> QSet:
    """Build a quasi-set, merging nested members that are indistinguishable.

    ``micro`` is a mapping (or pair iterable) from species labels to counts;
    zero counts are dropped. Items of ``subs`` are a ``QSet`` or a
    ``(QSet, multiplicity)`` pair.
    """
    if micro is None:
        micro = {}
    items = micro.items() if isinstance(micro, Mapping) else micro
    merged_micro: dict[Species, int] = {}
    for sp, c in items:
        sp = _species(sp)
        merged_micro[sp] = merged_micro.get(sp, 0) + c
    micro_pairs = tuple((sp, c) for sp, c in merged_micro.items() if c)

    merged: list[list] = []
    for item in subs:
        rep, mult = (item, 1) if isinstance(item, QSet) else item
        for slot in merged:
            if weak_ext_indist(slot[0], rep):
                slot[1] += mult
                break
        else:
            merged.append([rep, mult])
    return QSet(micro=micro_pairs, macro=frozenset(macro), subs=tuple((r, m) for r, m in merged))


def element_of(x) -> Element:
    """Coerce a bare ``QSet`` to a collection element."""
    if isinstance(x, QSet):
        return Collection(x)
    if isinstance(x, (MicroAtom, MacroAtom, Collection)):
        return x
    raise TypeError(f"not an element: {x!r}")


def singleton_of(el: Element, count: int = 1) -> QSet:
    """The quasi-set holding ``count`` copies of one class."""
    if count == 0:
        return EMPTY
    if isinstance(el, MicroAtom):
        return QSet(micro=((el.species, count),))
    if isinstance(el, MacroAtom):
        if count != 1:
            raise ValueError("a macro-atom occurs at most once")
        return QSet(macro=frozenset([el.id]))
    return QSet(subs=((el.q, count),))


def indist(a, b) -> bool:
    """Indistinguishability between two elements."""
    ta, tb = type(a), type(b)
    if ta is MicroAtom:
        return tb is MicroAtom and a.species.label == b.species.label
    if ta is MacroAtom:
        return tb is MacroAtom and a.id == b.id
    qa = a.q if ta is Collection else element_of(a).q
    if tb is Collection:
        return weak_ext_indist(qa, b.q)
    if tb is QSet:
        return weak_ext_indist(qa, b)
    element_of(b)
    return False


def ext_eq(a, b) -> bool:
    """Extensional equality; raises :class:`IllFormed` on micro-atoms."""
    a, b = element_of(a), element_of(b)
    if isinstance(a, MicroAtom) or isinstance(b, MicroAtom):
        raise IllFormed("extensional equality is not a formula on micro-atoms")
    if isinstance(a, MacroAtom) and isinstance(b, MacroAtom):
        return a.id == b.id
    if isinstance(a, Collection) and isinstance(b, Collection):
        return a.q == b.q
    return False


def qc(q: QSet) -> int:
    return sum(c for _, c in q.micro) + len(q.macro) + sum(m for _, m in q.subs)


def quotient(q: QSet) -> list[tuple[Element, int]]:
    """Classes of ``q`` with their sizes: species by label, macro ids, nested by canonical key."""
    micro = [(MicroAtom(sp), c) for sp, c in q.micro]
    macro = [(MacroAtom(m), 1) for m in sorted(q.macro)]
    subs = [(Collection(rep), m) for rep, m in sorted(q.subs, key=lambda s: s[0]._key)]
    return micro + macro + subs


def weak_ext_indist(x: QSet, y: QSet) -> bool:
    """Decide ``x ≡ y`` by matching quotient classes pairwise (same class, same size).

    Classes of different kinds never match, so the matching runs kind by kind:
    species counts, macro ids, then nested classes through :func:`indist`.
    """
    if x is y:
        return True
    if x.micro != y.micro or x.macro != y.macro or len(x.subs) != len(y.subs):
        return False

    def covered(left, right):
        return all(any(c == d and weak_ext_indist(z, t) for t, d in right) for z, c in left)

    return covered(x.subs, y.subs) and covered(y.subs, x.subs)


def count_indist(q: QSet, el) -> int:
    """How many members of ``q`` are indistinguishable from ``el``."""
    el = element_of(el)
    if type(el) is MicroAtom:
        return q._counts.get(el.species.label, 0)
    if type(el) is MacroAtom:
        return int(el.id in q.macro)
    return sum(m for rep, m in q.subs if weak_ext_indist(rep, el.q))


def is_subqset(y: QSet, q: QSet) -> bool:
    return all(count_indist(q, rep) >= c for rep, c in y.classes())


def _from_classes(classes: Iterable[tuple[Element, int]]) -> QSet:
    # callers pass classes of one validated quasi-set, in its canonical order
    micro, macro, subs = [], [], []
    for el, c in classes:
        if c == 0:
            continue
        if isinstance(el, MicroAtom):
            micro.append((el.species, c))
        elif isinstance(el, MacroAtom):
            macro.append(el.id)
        else:
            subs.append((el.q, c))
    return QSet._trusted(tuple(micro), frozenset(macro), tuple(subs))


def weak_pair(x, y, universe: QSet) -> QSet:
    """``[x, y]``: every member of ``universe`` indistinguishable from ``x`` or ``y``."""
    return _from_classes(
        (rep, c) for rep, c in universe.classes() if indist(rep, x) or indist(rep, y)
    )


def n_singleton(x: MicroAtom, n: int, universe: QSet) -> QSet:
    """A sub-quasi-set of ``[x]`` with quasi-cardinal ``n``."""
    if not isinstance(x, MicroAtom):
        raise TypeError("n-singletons are formed from micro-atoms")
    if n < 0:
        raise ValueError("n must be non-negative")
    cap = count_indist(universe, x)
    if n > cap:
        raise CapacityExceeded(f"[x] holds {cap} members, cannot take {n}")
    return singleton_of(x, n)


def strong_singleton(x: MicroAtom, universe: QSet) -> QSet:
    return n_singleton(x, 1, universe)


def sub_qset_with_qc(q: QSet, beta: int) -> QSet:
    """A sub-quasi-set of ``q`` with quasi-cardinal ``beta``.

    Selection fills species in label order, then macro ids, then nested
    members in stored order.
    """
    total = qc(q)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if beta > total:
        raise CapacityExceeded(f"qc(q) = {total} < {beta}")
    picked = []
    left = beta
    for rep, c in q.classes():
        if left == 0:
            break
        take = min(c, left)
        picked.append((rep, take))
        left -= take
    return _from_classes(picked)


def power_qc(q: QSet) -> int:
    """Quasi-cardinal of the power quasi-set, ``2 ** qc(q)``."""
    n = qc(q)
    if n >= INT_LIMIT.bit_length():
        raise OverflowError(f"2**{n} exceeds the int64 range")
    return 2**n


def enumerate_sub_classes(q: QSet, limit: int = ENUMERATION_LIMIT) -> list[QSet]:
    """All pairwise non-indistinguishable sub-quasi-sets of ``q``."""
    if qc(q) > limit:
        raise TooLarge(f"qc(q) = {qc(q)} exceeds enumeration bound {limit}")
    classes = list(q.classes())
    ranges = [range(c + 1) for _, c in classes]
    return [
        _from_classes(zip((rep for rep, _ in classes), counts))
        for counts in itertools.product(*ranges)
    ]


def separation(q: QSet, predicate) -> QSet:
    """``[t in q : predicate(t)]``."""
    return _from_classes((rep, c) for rep, c in q.classes() if predicate(rep))


def _require_pure(*qs: QSet):
    for q in qs:
        if not q.is_pure:
            raise NotPure("similarity is defined here for quasi-sets of micro-atoms only")


def similar(x: QSet, y: QSet) -> bool:
    _require_pure(x, y)
    return all(sx == sy for sx, _ in x.micro for sy, _ in y.micro)


def qsim(x: QSet, y: QSet) -> bool:
    return similar(x, y) and qc(x) == qc(y)
