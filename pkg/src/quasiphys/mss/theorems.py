"""Constructions behind the subsystem, equivalence and embedding results."""
from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from ..checks import Check, Report
from ..errors import DegenerateWitness
from .forces import Compensated, Coupled, Resplit, ZeroExternal
from .system import (
    DEFAULT_TOL,
    MSSSystem,
    absorb_external,
    equivalent,
    is_isolated,
    restrict,
    validate,
)
from .trajectory import Trajectory


def resplit_forces(sys: MSSSystem, coeffs: Mapping) -> MSSSystem:
    """An equivalent system with internal forces shifted along the lines of centres.

    ``coeffs`` maps ``frozenset({p, q})`` to a function of time. The external
    force absorbs the difference, so every particle keeps the same total.
    """
    internal = Resplit(sys.internal, dict(coeffs))
    external = Compensated(sys.external, internal, sys.particles)
    return MSSSystem(sys.particles, sys.trajectories, sys.masses, internal, external)


def env_id(p) -> str:
    return f"env:{p}"


def embedding_horizon(g_norm: float, m_p: float, m_e: float, t0: float) -> float:
    """Time at which the environment particle meets its partner."""
    k = 0.5 * g_norm * (1.0 / m_e + 1.0 / m_p)
    return t0 + 1.0 / math.sqrt(k)


def embed_isolated_uniform(sys: MSSSystem, m_e: float, grid=None) -> MSSSystem:
    """Embed non-interacting particles in constant fields into an isolated system.

    Each particle with a nonzero field ``g_p`` gets an environment partner of
    mass ``m_e`` sitting at ``s_p + d(t) g_p/|g_p|`` with
    ``d(t) = 1 - |g_p| (1/m_e + 1/m_p) (t - t0)**2 / 2``. The pair exchanges
    ``+g_p`` / ``-g_p`` as internal forces and all external forces vanish.
    """
    if not m_e > 0:
        raise ValueError("environment mass must be positive")
    times = sys.grid() if grid is None else np.asarray(grid, dtype=float)
    t0, t1 = sys.interval
    fields = {}
    for p in sys.particles:
        g0 = sys.g(p, t0)
        for t in times:
            pos = sys.positions(float(t))
            if np.any(sys.g(p, float(t), pos) != g0):
                raise ValueError(f"external force on {p!r} is not constant")
            if any(np.any(sys.f(p, q, float(t), pos) != 0) for q in sys.particles):
                raise ValueError("particles must not interact")
        fields[p] = g0

    active = {p: g for p, g in fields.items() if np.any(g != 0)}
    if not active:
        return sys

    ids = list(sys.particles)
    trajectories = dict(sys.trajectories)
    masses = dict(sys.masses)
    couplings = {}
    for p, g in active.items():
        norm = float(np.linalg.norm(g))
        horizon = embedding_horizon(norm, sys.masses[p], m_e, t0)
        if horizon <= t1:
            raise DegenerateWitness(
                f"environment of {p!r} collides with it at t={horizon:.12g}; shrink the interval or raise m_e",
                horizon,
            )
        unit = g / norm
        k = 0.5 * norm * (1.0 / m_e + 1.0 / sys.masses[p])
        traj = sys.trajectories[p]
        dt = traj.times - t0
        d = 1.0 - k * dt**2
        samples = traj.samples + d[:, None] * unit
        velocities = traj._velocity_table + (-2 * k * dt)[:, None] * unit
        e = env_id(p)
        ids.append(e)
        trajectories[e] = Trajectory(traj.t0, traj.h, samples, velocities)
        masses[e] = m_e
        couplings[(p, e)] = g
        couplings[(e, p)] = -g
    return MSSSystem(tuple(ids), trajectories, masses, Coupled(sys.internal, couplings), ZeroExternal())


def verify_embedding(sys: MSSSystem, big: MSSSystem, tol: float = DEFAULT_TOL, grid=None) -> Report:
    """Check that ``big`` is an isolated system containing ``sys`` as a part.

    The plain restriction of ``big`` is compared with ``sys`` for equivalence;
    the restriction with absorbed cross forces must satisfy the axioms.
    """
    ids = sys.particles
    report = Report()
    report.add(Check("isolated", is_isolated(big, grid)))
    report.add(Check("validates", validate(big, tol, grid).passed))
    report.add(Check("equivalent-to-restriction", equivalent(sys, restrict(big, ids))))
    report.add(Check("absorbed-restriction-validates", validate(absorb_external(big, ids), tol, grid).passed))
    return report
