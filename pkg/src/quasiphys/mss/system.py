"""Particle-mechanics systems and their axiom validator.

A system bundles particle ids, sampled trajectories, masses and two force
laws. :func:`validate` checks the seven axioms P1..P7 on a time grid and
reports the largest residual of each one.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from ..checks import Check, Report, residual_check
from ..errors import EmptySelection, OutOfInterval, UnknownParticle
from .forces import Absorbed, ExternalLaw, InternalLaw, ZeroExternal, ZeroInternal

DEFAULT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MSSSystem:
    particles: tuple
    trajectories: Mapping
    masses: Mapping
    internal: InternalLaw = ZeroInternal()
    external: ExternalLaw = ZeroExternal()

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        object.__setattr__(self, "trajectories", dict(self.trajectories))
        object.__setattr__(self, "masses", {p: float(m) for p, m in self.masses.items()})
        ids = set(self.particles)
        if len(ids) != len(self.particles):
            raise ValueError("particle ids must be unique")
        for name, table in (("trajectories", self.trajectories), ("masses", self.masses)):
            if set(table) != ids:
                raise ValueError(f"{name} must be defined for exactly the particle ids")

    @property
    def interval(self) -> tuple[float, float]:
        first = self.trajectories[self.particles[0]]
        return first.t0, first.t1

    def grid(self) -> np.ndarray:
        return self.trajectories[self.particles[0]].times

    def _check(self, p, t):
        if p not in self.masses:
            raise UnknownParticle(p)
        t0, t1 = self.interval
        if not (t0 - 1e-9 <= t <= t1 + 1e-9):
            raise OutOfInterval(f"t={t} outside [{t0}, {t1}]")

    def positions(self, t) -> dict:
        return {p: self.trajectories[p].position(t) for p in self.particles}

    def f(self, p, q, t, pos=None) -> np.ndarray:
        """Internal force exerted on ``p`` by ``q``."""
        if pos is None:
            pos = self.positions(t)
        return np.asarray(self.internal(p, q, t, pos, self.masses), dtype=float)

    def g(self, p, t, pos=None) -> np.ndarray:
        if pos is None:
            pos = self.positions(t)
        return np.asarray(self.external(p, t, pos, self.masses), dtype=float)

    def accel(self, p, t) -> np.ndarray:
        return self.trajectories[p].acceleration(t)


def _norm(v) -> float:
    return float(np.sqrt(np.dot(v, v)))


def _grid(sys: MSSSystem, grid) -> np.ndarray:
    return sys.grid() if grid is None else np.asarray(grid, dtype=float)


def validate(sys: MSSSystem, tol: float = DEFAULT_TOL, grid: Optional[Iterable[float]] = None) -> Report:
    """Check P1..P7; failures become report entries, never exceptions."""
    report = Report()
    ids = sys.particles
    report.add(Check("P1", len(ids) > 0, 0.0 if ids else float("inf"), detail="non-empty finite particle set"))
    if not ids:
        return report
    t0, t1 = sys.interval
    report.add(Check("P2", t1 > t0, 0.0 if t1 > t0 else float("inf"), witness=(t0, t1)))

    times = _grid(sys, grid)
    in_range = bool(np.all((times >= t0 - 1e-9) & (times <= t1 + 1e-9)))
    shared = all(sys.trajectories[p].same_grid(sys.trajectories[ids[0]]) for p in ids)
    finite = all(np.all(np.isfinite(sys.trajectories[p].accelerations)) for p in ids)
    ok3 = in_range and shared and finite
    report.add(Check("P3", ok3, 0.0 if ok3 else float("inf"), detail="second derivatives computable on the grid"))

    bad_mass = [p for p in ids if not sys.masses[p] > 0]
    report.add(Check("P4", not bad_mass, 0.0 if not bad_mass else float("inf"), witness=bad_mass[:1] or None))
    if not ok3:
        for name in ("P5", "P6", "P7"):
            report.add(Check(name, False, float("inf"), detail="skipped: P3 failed"))
        return report

    worst = {"P5": (0.0, None), "P6": (0.0, None), "P7": (0.0, None)}

    def bump(name, value, witness):
        if value > worst[name][0] or not np.isfinite(value):
            worst[name] = (value, witness)

    for t in times:
        t = float(t)
        pos = sys.positions(t)
        forces = {(p, q): sys.f(p, q, t, pos) for p in ids for q in ids}
        for i, p in enumerate(ids):
            for q in ids[i:]:
                fpq, fqp = forces[p, q], forces[q, p]
                bump("P5", _norm(fpq + fqp), (p, q, t))
                bump("P6", _norm(np.cross(pos[p], fpq) + np.cross(pos[q], fqp)), (p, q, t))
            total = sum(forces[p, q] for q in ids) + sys.g(p, t, pos)
            bump("P7", _norm(sys.masses[p] * sys.accel(p, t) - total), (p, t))

    for name, (value, witness) in worst.items():
        report.add(residual_check(name, value, tol, witness, cases=len(times)))
    return report


def restrict(parent: MSSSystem, ids) -> MSSSystem:
    """Restrict trajectories, masses and both force laws to ``ids``."""
    keep = tuple(p for p in parent.particles if p in set(ids))
    if not keep:
        raise EmptySelection("subsystem needs at least one particle")
    unknown = set(ids) - set(parent.particles)
    if unknown:
        raise UnknownParticle(sorted(map(str, unknown)))
    return MSSSystem(
        keep,
        {p: parent.trajectories[p] for p in keep},
        {p: parent.masses[p] for p in keep},
        parent.internal,
        parent.external,
    )


def subsystem_residual(parent: MSSSystem, ids, grid=None) -> tuple[float, Optional[tuple]]:
    """Largest violation of the restricted Newton equation, with its witness."""
    sub = restrict(parent, ids)
    worst, witness = 0.0, None
    for t in _grid(sub, grid):
        t = float(t)
        pos = parent.positions(t)
        for p in sub.particles:
            total = sum(sub.f(p, q, t, pos) for q in sub.particles) + sub.g(p, t, pos)
            r = _norm(sub.masses[p] * sub.accel(p, t) - total)
            if r > worst:
                worst, witness = r, (p, t)
    return worst, witness


def is_subsystem(parent: MSSSystem, ids, tol: float = DEFAULT_TOL, grid=None) -> bool:
    return subsystem_residual(parent, ids, grid)[0] <= tol


def absorb_external(parent: MSSSystem, ids) -> MSSSystem:
    """Restriction whose external force also carries the pull of the dropped particles."""
    sub = restrict(parent, ids)
    dropped = tuple(q for q in parent.particles if q not in set(sub.particles))
    if not dropped:
        return sub
    return MSSSystem(sub.particles, sub.trajectories, sub.masses, parent.internal, Absorbed(parent, dropped))


def equivalent(a: MSSSystem, b: MSSSystem, atol: float = 1e-12) -> bool:
    """Same particles, interval, trajectories and masses; forces may differ."""
    if set(a.particles) != set(b.particles):
        return False
    if not np.allclose(a.interval, b.interval, rtol=0, atol=atol):
        return False
    for p in a.particles:
        ta, tb = a.trajectories[p], b.trajectories[p]
        if not ta.same_grid(tb) or not np.allclose(ta.samples, tb.samples, rtol=0, atol=atol):
            return False
        if a.masses[p] != b.masses[p]:
            return False
    return True


def isolation_check(sys: MSSSystem, grid=None) -> Check:
    for t in _grid(sys, grid):
        t = float(t)
        pos = sys.positions(t)
        for p in sys.particles:
            g = sys.g(p, t, pos)
            if np.any(g != 0):
                return Check("isolated", False, _norm(g), witness=(p, t))
    return Check("isolated", True)


def is_isolated(sys: MSSSystem, grid=None) -> bool:
    return isolation_check(sys, grid).passed


def total_applied_force(sys: MSSSystem, p, t: float) -> np.ndarray:
    """Sum of internal forces on ``p`` plus its external force."""
    sys._check(p, t)
    pos = sys.positions(t)
    return sum(sys.f(p, q, t, pos) for q in sys.particles) + sys.g(p, t, pos)


def momentum(sys: MSSSystem, t: float) -> np.ndarray:
    return sum(sys.masses[p] * sys.trajectories[p].velocity(t) for p in sys.particles)


def angular_momentum(sys: MSSSystem, t: float) -> np.ndarray:
    return sum(
        sys.masses[p] * np.cross(sys.trajectories[p].position(t), sys.trajectories[p].velocity(t))
        for p in sys.particles
    )


def conservation_drift(sys: MSSSystem) -> tuple[float, float]:
    """Largest deviation of total momentum and angular momentum from their initial values."""
    total_p = np.zeros((sys.trajectories[sys.particles[0]].n, 3))
    total_l = np.zeros_like(total_p)
    for p in sys.particles:
        traj = sys.trajectories[p]
        v = traj._velocity_table
        total_p += sys.masses[p] * v
        total_l += sys.masses[p] * np.cross(traj.samples, v)
    dp = np.linalg.norm(total_p - total_p[0], axis=1).max()
    dl = np.linalg.norm(total_l - total_l[0], axis=1).max()
    return float(dp), float(dl)
