"""Particle mechanics with particles that have no individuality.

A particle is a triple of a micro-atom, a mass and a trajectory. The
micro-atoms all come from one n-singleton, so two particles differ only if
their masses or trajectories do. Force specifications see particles through
these triples. An analytic law over (mass, state, time) is automatically a
quasi-function. A tabulated specification indexed by position in the particle
list is not, and :func:`validate_q` checks it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .checks import Check, Report, residual_check
from .errors import IntervalMismatch, SingularityError, StepRejected
from .mss.integrate import rk4_step, step_count
from .mss.trajectory import Trajectory
from .qset import MicroAtom, QSet, Species, indist, qc, qset

DEFAULT_EPS_MIN = 1e-6


@dataclass(frozen=True, eq=False)
class QParticle:
    mu: MicroAtom
    mass: float
    traj: Trajectory

    def __post_init__(self):
        if not isinstance(self.mu, MicroAtom):
            raise TypeError("first component must be a micro-atom")

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return self.traj.position(t), self.traj.velocity(t)


def qparticle_indist(p1: QParticle, p2: QParticle, eps: float = 0.0) -> bool:
    """Same species, equal mass and samplewise trajectories within ``eps``."""
    if not p1.traj.same_grid(p2.traj):
        raise IntervalMismatch("trajectories must share interval and step")
    if not indist(p1.mu, p2.mu) or p1.mass != p2.mass:
        return False
    return float(np.max(np.abs(p1.traj.samples - p2.traj.samples))) <= eps


def newtonian_gravity(p1: QParticle, p2: QParticle, t: float, gamma: float = 1.0) -> np.ndarray:
    """``gamma m1 m2 (s1 - s2) / |s1 - s2|**3``: the pull ``p1`` exerts on ``p2``.

    Swapping the arguments negates the vector.
    """
    s1, s2 = p1.traj.position(t), p2.traj.position(t)
    d = s1 - s2
    r = float(np.sqrt(d @ d))
    if r == 0.0:
        raise SingularityError(("p1", "p2"), t, 0.0)
    return gamma * p1.mass * p2.mass * d / r**3


# force specifications ------------------------------------------------------


class PairSpec:
    """Internal force ``f(a; b; t)`` on particle ``a`` due to ``b`` (indices into the system)."""

    analytic = False

    def __call__(self, sys: "QMSSSystem", i: int, j: int, t: float) -> np.ndarray:
        raise NotImplementedError


class FieldSpec:
    analytic = False

    def __call__(self, sys: "QMSSSystem", i: int, t: float) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class AnalyticPair(PairSpec):
    """Force from ``law(m_a, s_a, v_a, m_b, s_b, v_b, t)``; sees only the triples."""

    law: Callable
    analytic = True

    def __call__(self, sys, i, j, t):
        a, b = sys.particles[i], sys.particles[j]
        return np.asarray(self.law(a.mass, *a.state(t), b.mass, *b.state(t), t), dtype=float)


@dataclass(frozen=True)
class QGravity(PairSpec):
    gamma: float = 1.0
    analytic = True

    def __call__(self, sys, i, j, t):
        if i == j:
            return np.zeros(3)
        # the force on a is the pull that b exerts on it
        return newtonian_gravity(sys.particles[j], sys.particles[i], t, self.gamma)


@dataclass(frozen=True)
class ZeroPair(PairSpec):
    analytic = True

    def __call__(self, sys, i, j, t):
        return np.zeros(3)


@dataclass(frozen=True)
class IndexedPair(PairSpec):
    """Forces keyed by list position; may break congruence."""

    fn: Callable

    def __call__(self, sys, i, j, t):
        return np.asarray(self.fn(i, j, t), dtype=float)


@dataclass(frozen=True)
class AnalyticField(FieldSpec):
    law: Callable
    analytic = True

    def __call__(self, sys, i, t):
        a = sys.particles[i]
        return np.asarray(self.law(a.mass, *a.state(t), t), dtype=float)


@dataclass(frozen=True)
class ZeroField(FieldSpec):
    analytic = True

    def __call__(self, sys, i, t):
        return np.zeros(3)


@dataclass(frozen=True)
class IndexedField(FieldSpec):
    fn: Callable

    def __call__(self, sys, i, t):
        return np.asarray(self.fn(i, t), dtype=float)


# systems -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QMSSSystem:
    ensemble: QSet
    particles: tuple
    internal: PairSpec = ZeroPair()
    external: FieldSpec = ZeroField()

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))

    @property
    def n(self) -> int:
        return len(self.particles)

    @property
    def interval(self) -> tuple[float, float]:
        tr = self.particles[0].traj
        return tr.t0, tr.t1

    def grid(self) -> np.ndarray:
        return self.particles[0].traj.times

    def f(self, i, j, t) -> np.ndarray:
        return self.internal(self, i, j, t)

    def g(self, i, t) -> np.ndarray:
        return self.external(self, i, t)


def build_qmss(species, masses, trajectories, internal=ZeroPair(), external=ZeroField()) -> QMSSSystem:
    """Draw ``len(masses)`` micro-atoms of ``species`` as an n-singleton and pair them up."""
    sp = species if isinstance(species, Species) else Species(species)
    n = len(masses)
    ensemble = qset({sp: n})
    particles = tuple(QParticle(MicroAtom(sp), float(m), tr) for m, tr in zip(masses, trajectories))
    return QMSSSystem(ensemble, particles, internal, external)


def indist_classes(sys: QMSSSystem, eps: float = 0.0) -> list[list[int]]:
    classes: list[list[int]] = []
    for i, p in enumerate(sys.particles):
        for cls in classes:
            if qparticle_indist(sys.particles[cls[0]], p, eps):
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes


def validate_q(sys: QMSSSystem, tol: float = 1e-6, grid: Optional[Sequence[float]] = None) -> Report:
    report = Report()
    ens = sys.ensemble
    species = [sp for sp, _ in ens.micro]
    ok1 = ens.is_pure and len(species) == 1 and qc(ens) >= 1
    ok1 = ok1 and all(p.mu.species == species[0] for p in sys.particles)
    report.add(Check("QP1", ok1, 0.0 if ok1 else float("inf"), detail="n-singleton of micro-atoms"))
    if not sys.particles:
        report.add(Check("QP5", False, float("inf"), detail="no particles"))
        return report

    t0, t1 = sys.interval
    report.add(Check("QP2", t1 > t0, 0.0 if t1 > t0 else float("inf")))
    first = sys.particles[0].traj
    ok3 = all(p.traj.same_grid(first) and np.all(np.isfinite(p.traj.accelerations)) for p in sys.particles)
    report.add(Check("QP3", ok3, 0.0 if ok3 else float("inf")))
    ok4 = all(p.mass > 0 for p in sys.particles)
    report.add(Check("QP4", ok4, 0.0 if ok4 else float("inf")))
    ok5 = len(sys.particles) == qc(ens)
    report.add(Check("QP5", ok5, 0.0 if ok5 else float("inf"), detail=f"{len(sys.particles)} particles, qc={qc(ens)}"))
    if not ok3:
        return report

    times = sys.grid() if grid is None else np.asarray(grid, dtype=float)
    n = sys.n
    classes = indist_classes(sys)
    class_of = {i: k for k, cls in enumerate(classes) for i in cls}
    worst = {name: (0.0, None) for name in ("QP8", "QP9", "QP10", "indist-zero-force")}
    congruence = {"QP6": None, "QP7": None}

    def bump(name, value, witness):
        if value > worst[name][0] or not np.isfinite(value):
            worst[name] = (value, witness)

    for t in map(float, times):
        forces = {(i, j): sys.f(i, j, t) for i in range(n) for j in range(n) if i != j}
        fields = [sys.g(i, t) for i in range(n)]
        pos = [p.traj.position(t) for p in sys.particles]
        # quasi-functions: indistinguishable arguments give identical vectors
        seen_pairs: dict = {}
        for (i, j), f in forces.items():
            key = (class_of[i], class_of[j], i == j)
            if key in seen_pairs and congruence["QP6"] is None:
                ref, where = seen_pairs[key]
                if not np.array_equal(ref, f):
                    congruence["QP6"] = (where, (i, j, t))
            seen_pairs.setdefault(key, (f, (i, j, t)))
        seen_fields: dict = {}
        for i, g in enumerate(fields):
            k = class_of[i]
            if k in seen_fields and congruence["QP7"] is None and not np.array_equal(seen_fields[k][0], g):
                congruence["QP7"] = (seen_fields[k][1], (i, t))
            seen_fields.setdefault(k, (g, (i, t)))

        for i in range(n):
            for j in range(i + 1, n):
                fij, fji = forces[i, j], forces[j, i]
                bump("QP8", float(np.linalg.norm(fij + fji)), (i, j, t))
                bump("QP9", float(np.linalg.norm(np.cross(pos[i], fij) + np.cross(pos[j], fji))), (i, j, t))
                if class_of[i] == class_of[j]:
                    bump("indist-zero-force", float(np.linalg.norm(fij)), (i, j, t))
            # the self term is zero; the sum runs over the n - 1 counterparts
            total = sum((forces[i, j] for j in range(n) if j != i), np.zeros(3)) + fields[i]
            residual = sys.particles[i].mass * sys.particles[i].traj.acceleration(t) - total
            bump("QP10", float(np.linalg.norm(residual)), (i, t))

    for name in ("QP6", "QP7"):
        w = congruence[name]
        report.add(Check(name, w is None, 0.0 if w is None else float("inf"), witness=w, detail="congruence"))
    for name, (value, witness) in worst.items():
        report.add(residual_check(name, value, tol, witness, cases=len(times)))
    return report


# gravity simulation ----------------------------------------------------------


def _gravity_accel(x: np.ndarray, m: np.ndarray, gamma: float) -> np.ndarray:
    d = x[None, :, :] - x[:, None, :]  # d[i, j] = x_j - x_i
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, np.inf)
    inv_r3 = r2**-1.5
    return gamma * np.einsum("ij,j,ijk->ik", inv_r3, m, d)


def _closest_approach(a0: np.ndarray, a1: np.ndarray) -> float:
    """Minimum norm along the straight segment from ``a0`` to ``a1``."""
    d = a1 - a0
    dd = d @ d
    s = 0.0 if dd == 0 else min(max(-(a0 @ d) / dd, 0.0), 1.0)
    p = a0 + s * d
    return float(np.sqrt(p @ p))


def simulate_gravity(
    initial: Sequence[tuple],
    gamma: float = 1.0,
    h: float = 1e-3,
    eps_min: float = DEFAULT_EPS_MIN,
    interval: tuple = (0.0, 1.0),
    species: str = "particle",
) -> QMSSSystem:
    """Integrate n bodies under mutual gravity with RK4.

    ``initial`` holds ``(mass, position, velocity)`` per body. The run stops
    with :class:`SingularityError` as soon as two bodies come within
    ``eps_min`` of each other during a step.
    """
    masses = np.array([float(m) for m, _, _ in initial])
    x0 = np.array([p for _, p, _ in initial], dtype=float).reshape(-1, 3)
    v0 = np.array([v for _, _, v in initial], dtype=float).reshape(-1, 3)
    n = len(masses)
    t0, t1 = map(float, interval)
    steps = step_count(t0, t1, h)

    def check(y_prev, ends, t_prev):
        for i in range(n):
            for j in range(i + 1, n):
                a0 = y_prev[i] - y_prev[j]
                sep = min(_closest_approach(a0, y[i] - y[j]) for y in ends)
                if not np.isfinite(sep) or sep < eps_min:
                    raise SingularityError((i, j), t_prev, sep)

    stages: list = []

    def deriv(t, y):
        stages.append(y)
        acc = _gravity_accel(y[:n], masses, gamma)
        if not np.all(np.isfinite(acc)):
            raise StepRejected(f"non-finite acceleration at t={t:.12g}")
        return np.concatenate([y[n:], acc])

    y = np.concatenate([x0, v0])
    check(y, [y], t0)
    states = np.empty((steps + 1, 2 * n, 3))
    states[0] = y
    for k in range(steps):
        t = t0 + k * h
        stages.clear()
        try:
            y_new = rk4_step(deriv, t, y, h)
        except StepRejected:
            check(y, stages, t)
            x = y[:n]
            gaps = {(i, j): float(np.linalg.norm(x[i] - x[j])) for i in range(n) for j in range(i + 1, n)}
            pair = min(gaps, key=gaps.get)
            raise SingularityError(pair, t, gaps[pair]) from None
        # a step that jumps across a close encounter shows it in its stage states
        check(y, stages + [y_new], t)
        y = y_new
        states[k + 1] = y
    trajectories = [Trajectory(t0, h, states[:, i], states[:, n + i]) for i in range(n)]
    return build_qmss(species, masses, trajectories, QGravity(gamma))


# individuation ---------------------------------------------------------------


@dataclass
class IndividuationReport:
    times: list = field(default_factory=list)
    classes: list = field(default_factory=list)  # per time: list of index lists

    def sizes(self) -> list[list[int]]:
        return [sorted((len(c) for c in cls), reverse=True) for cls in self.classes]

    def rows(self):
        for t, cls in zip(self.times, self.classes):
            for k, members in enumerate(cls):
                yield t, k, len(members)

    @property
    def all_singletons(self) -> bool:
        return all(len(c) == 1 for cls in self.classes for c in cls)


def individuation_report(sys: QMSSSystem, times=None, eps: float = 0.0) -> IndividuationReport:
    """Partition the particles at each time by (mass, position, velocity) within ``eps``."""
    times = sys.grid() if times is None else times
    report = IndividuationReport()
    n = sys.n
    for t in map(float, times):
        states = [p.state(t) for p in sys.particles]
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(n):
            for j in range(i + 1, n):
                a, b = sys.particles[i], sys.particles[j]
                close = (
                    indist(a.mu, b.mu)
                    and a.mass == b.mass
                    and np.max(np.abs(states[i][0] - states[j][0])) <= eps
                    and np.max(np.abs(states[i][1] - states[j][1])) <= eps
                )
                if close:
                    parent[find(j)] = find(i)
        groups: dict = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        report.times.append(t)
        report.classes.append(sorted(groups.values()))
    return report
