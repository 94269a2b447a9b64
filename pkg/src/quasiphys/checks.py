"""Result records shared by the axiom validators and the scenario runner."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class Check:
    name: str
    passed: bool
    max_residual: float = 0.0
    witness: Optional[Any] = None
    detail: str = ""
    cases: int = 1

    def __bool__(self):
        return self.passed


@dataclass
class Report:
    checks: list = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self):
        return self.passed

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __iter__(self):
        return iter(self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def residual_check(name, residual, tol, witness=None, cases=1) -> Check:
    return Check(name, bool(residual <= tol), float(residual), None if residual <= tol else witness, cases=cases)
