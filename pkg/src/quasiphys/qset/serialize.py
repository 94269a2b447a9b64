"""Universe description files (JSON).

Layout::

    {"species": [{"label": "electron", "count": 3}],
     "macro": ["a", "b"],
     "subs": [{"multiplicity": 1, "qset": {...}}]}

Species and macro ids are written sorted; nested members keep their stored
order, so ``dumps(loads(dumps(q))) == dumps(q)``.
"""
from __future__ import annotations

import json
from pathlib import Path

from .core import QSet


def to_dict(q: QSet) -> dict:
    return {
        "species": [{"label": sp.label, "count": c} for sp, c in q.micro],
        "macro": sorted(q.macro),
        "subs": [{"multiplicity": m, "qset": to_dict(rep)} for rep, m in q.subs],
    }


def from_dict(data: dict) -> QSet:
    unknown = set(data) - {"species", "macro", "subs"}
    if unknown:
        raise ValueError(f"unknown universe keys: {sorted(unknown)}")
    micro = tuple((s["label"], int(s["count"])) for s in data.get("species", []))
    subs = tuple((from_dict(s["qset"]), int(s.get("multiplicity", 1))) for s in data.get("subs", []))
    return QSet(micro=micro, macro=frozenset(data.get("macro", [])), subs=subs)


def dumps(q: QSet) -> str:
    return json.dumps(to_dict(q), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> QSet:
    return from_dict(json.loads(text))


def dump(q: QSet, path) -> None:
    Path(path).write_text(dumps(q))


def load(path) -> QSet:
    return loads(Path(path).read_text())
