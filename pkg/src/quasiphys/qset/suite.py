"""Executable axiom checks over generated finite universes.

``run_suite`` sweeps every universe with up to five species (counts 1..4, up
to relabelling), up to four macro-atoms and nesting depth up to two, then a
batch of random universes. Each axiom family reports one aggregated
:class:`~quasiphys.checks.Check`.
"""
from __future__ import annotations

import itertools
from collections import Counter, defaultdict

import numpy as np

from ..checks import Check
from .core import (
    EMPTY,
    Collection,
    MacroAtom,
    MicroAtom,
    QSet,
    Species,
    count_indist,
    enumerate_sub_classes,
    ext_eq,
    indist,
    is_subqset,
    power_qc,
    qc,
    qset,
    quotient,
    separation,
    sub_qset_with_qc,
    weak_ext_indist,
    weak_pair,
)
from .functions import QuasiFunction, validate_qf
from .predicates import (
    FALSE,
    TRUE,
    IsCollection,
    MacroIdIs,
    QcAtMost,
    QcEquals,
    SpeciesIs,
)

SPECIES = tuple(f"s{i}" for i in range(5))
MACROS = tuple(f"m{i}" for i in range(4))


def nested_variants() -> list[tuple]:
    """Nested blocks used by the exhaustive sweep, depth 0 to 2."""
    one = qset({"s0": 1})
    return [
        (),
        ((EMPTY, 1),),
        ((one, 2), (qset({"s1": 2}, macro=["m0"]), 1)),
        ((qset(subs=[one]), 1), (qset(subs=[(one, 3)], micro={"s2": 1}), 2)),
    ]


def exhaustive_universes():
    for k in range(len(SPECIES) + 1):
        for counts in itertools.combinations_with_replacement(range(1, 5), k):
            micro = dict(zip(SPECIES, counts))
            for n_macro in range(len(MACROS) + 1):
                for subs in nested_variants():
                    yield QSet(micro=tuple(micro.items()), macro=frozenset(MACROS[:n_macro]), subs=subs)


def random_qset(rng: np.random.Generator, depth: int = 2, labels=SPECIES + ("s5", "s6")) -> QSet:
    n_species = int(rng.integers(0, 6))
    chosen = rng.choice(len(labels), size=n_species, replace=False)
    micro = {labels[i]: int(rng.integers(1, 5)) for i in chosen}
    n_macro = int(rng.integers(0, 5))
    macro = [f"m{i}" for i in rng.choice(8, size=n_macro, replace=False)]
    subs = []
    if depth > 0:
        for _ in range(int(rng.integers(0, 3))):
            rep = random_qset(rng, depth - 1, labels)
            mult = int(rng.integers(1, 4)) if rep.has_micro else 1
            subs.append((rep, mult))
    try:
        return qset(micro, macro, subs)
    except ValueError:
        # merged copies of an m-atom-free set; drop the nested block
        return qset(micro, macro)


def predicate_family(universe: QSet) -> list:
    preds = [TRUE, FALSE, IsCollection(), QcEquals(0), QcEquals(1), QcAtMost(2)]
    preds += [SpeciesIs(sp) for sp, _ in universe.micro[:2]]
    preds += [MacroIdIs(m) for m in sorted(universe.macro)[:2]]
    if len(preds) > 7:
        preds.append(preds[6] | ~IsCollection())
        preds.append(~preds[7] & TRUE)
    return preds


def element_pool() -> list:
    """Elements for the relation-law checks; collections are built twice on purpose."""
    pool = [MicroAtom(Species(s)) for s in SPECIES for _ in range(2)]
    pool += [MacroAtom(m) for m in MACROS]
    flats = []
    for a, b in itertools.product(range(3), repeat=2):
        for macro in ((), ("m0",)):
            flats.append(qset({"s0": a, "s1": b}, macro))
    nested = [qset(subs=[(f, 1 if not f.has_micro else 2)]) for f in flats[::3]]
    nested += [qset({"s0": 1}, subs=[f]) for f in flats[::4]]
    deep = [qset(subs=[n]) for n in nested[::2]]
    for q in flats + nested + deep:
        pool.append(Collection(q))
        # rebuilt from its serialized parts: a distinct Python object
        pool.append(Collection(QSet(micro=q.micro, macro=q.macro, subs=tuple(reversed(q.subs)))))
    return pool


class _Tally:
    def __init__(self):
        self.cases = Counter()
        self.witness = {}

    def record(self, name, ok, witness=None):
        self.cases[name] += 1
        if not ok and name not in self.witness:
            self.witness[name] = witness

    def checks(self) -> list[Check]:
        return [
            Check(name, name not in self.witness, witness=self.witness.get(name), cases=n)
            for name, n in self.cases.items()
        ]


def check_relation_laws(pool, tally: _Tally):
    n = len(pool)
    rel = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            rel[i, j] = indist(pool[i], pool[j])
    tally.record("equivalence-reflexive", bool(rel.diagonal().all()), "diagonal")
    tally.record("equivalence-symmetric", bool((rel == rel.T).all()), "asymmetric pair")
    composed = (rel.astype(np.int64) @ rel.astype(np.int64)) > 0
    tally.record("equivalence-transitive", bool(not (composed & ~rel).any()), "intransitive triple")

    non_micro = [e for e in pool if not isinstance(e, MicroAtom)]
    for a in non_micro:
        preds = predicate_family(a.q) if isinstance(a, Collection) else [TRUE, MacroIdIs(a.id)]
        for b in non_micro:
            if ext_eq(a, b):
                ok = all(p(a) == p(b) for p in preds)
                tally.record("ext-eq-substitutivity", ok, (a, b))
    for a in pool:
        if isinstance(a, MicroAtom):
            try:
                ext_eq(a, a)
                tally.record("ext-eq-ill-formed-on-micro", False, a)
            except TypeError:
                tally.record("ext-eq-ill-formed-on-micro", True)


def check_universe(u: QSet, tally: _Tally):
    classes = list(u.classes())
    total = qc(u)

    tally.record("qc-sum-rule", total == sum(c for _, c in quotient(u)), u)
    if not u.has_micro:
        members = [rep for rep, _ in classes]
        tally.record("qc-classical-cardinality", total == len(members), u)

    for beta in range(total + 1):
        y = sub_qset_with_qc(u, beta)
        tally.record("subqset-existence", qc(y) == beta and is_subqset(y, u), (u, beta))

    probes = [rep for rep, _ in classes] + [MicroAtom(Species("outsider")), MacroAtom("outsider")]
    hits = [[indist(r, x) for r, _ in classes] for x in probes]
    for i, j in itertools.combinations_with_replacement(range(len(probes)), 2):
        x, y = probes[i], probes[j]
        pair = weak_pair(x, y, u)
        wanted = [(r, c) for (r, c), a, b in zip(classes, hits[i], hits[j]) if a or b]
        # exact membership: all matching classes of u with full count, nothing else
        ok = qc(pair) == sum(c for _, c in wanted) and all(count_indist(pair, r) == c for r, c in wanted)
        ok = ok and all(indist(r, x) or indist(r, y) for r, _ in pair.classes())
        tally.record("weak-pair-membership", ok, (u, x, y))

    for p in predicate_family(u):
        s = separation(u, p)
        ok = is_subqset(s, u) and all(p(r) for r, _ in s.classes())
        ok = ok and all(count_indist(s, r) == c for r, c in classes if p(r))
        tally.record("separation", ok, (u, p))

    pure = QSet(micro=u.micro)
    n = qc(pure)
    candidates = [sub_qset_with_qc(pure, b) for b in sorted({0, 1, n // 2, n - 1, n}) if 0 <= b <= n]
    candidates.append(QSet(micro=tuple(reversed(pure.micro))))
    if pure.micro:
        (sp, c), rest = pure.micro[0], pure.micro[1:]
        candidates.append(QSet(micro=((sp, c + 1),) + rest))
    for x, y in itertools.combinations_with_replacement(candidates, 2):
        same_quotient = [(r.species.label, c) for r, c in quotient(x)] == [
            (r.species.label, c) for r, c in quotient(y)
        ]
        tally.record("weak-extensionality", weak_ext_indist(x, y) == same_quotient, (x, y))


def check_power(tally: _Tally, max_qc: int = 12):
    for n in range(max_qc + 1):
        pure = qset({"s0": n})
        classes = enumerate_sub_classes(pure)
        tally.record("power-qc", power_qc(pure) == 2**n, n)
        tally.record("pure-sub-classes", len(classes) == n + 1, n)
        if n <= len(MACROS):
            sets = qset(macro=MACROS[:n])
            tally.record("set-sub-classes", len(enumerate_sub_classes(sets)) == power_qc(sets), n)


def check_quasi_functions(rng: np.random.Generator, tally: _Tally, cases: int = 200):
    atoms = [MicroAtom(Species(s)) for s in SPECIES]
    for _ in range(cases):
        size = int(rng.integers(2, 8))
        ins = [atoms[i] for i in rng.integers(0, 3, size=size)]
        table = {a.species.label: atoms[int(rng.integers(0, 5))] for a in ins}
        constant = QuasiFunction(tuple((a, table[a.species.label]) for a in ins))
        tally.record("qf-accepts-class-constant", validate_qf(constant).ok, constant)
        outs = [atoms[int(rng.integers(0, 5))] for _ in ins]
        f = QuasiFunction(tuple(zip(ins, outs)))
        expected = all(
            not indist(a1, a2) or indist(b1, b2)
            for (a1, b1), (a2, b2) in itertools.combinations(f.pairs, 2)
        )
        tally.record("qf-verdict", validate_qf(f).ok == expected, f)


def run_suite(random_universes: int = 1000, seed: int = 0, exhaustive: bool = True) -> list[Check]:
    rng = np.random.default_rng(seed)
    tally = _Tally()
    tally.record("qc-empty", qc(EMPTY) == 0)
    check_relation_laws(element_pool(), tally)
    universes = list(exhaustive_universes()) if exhaustive else []
    universes += [random_qset(rng) for _ in range(random_universes)]
    for u in universes:
        check_universe(u, tally)
    check_power(tally)
    check_quasi_functions(rng, tally)
    return tally.checks()


def check_universes(universes) -> list[Check]:
    """Per-universe checks over an explicit list of quasi-sets."""
    tally = _Tally()
    for u in universes:
        check_universe(u, tally)
    return tally.checks()


def class_histogram(universes) -> dict:
    """Count universes by (number of species, number of macro-atoms, depth)."""
    hist = defaultdict(int)
    for u in universes:
        hist[(len(u.micro), len(u.macro), u.depth)] += 1
    return dict(hist)
