"""Classical fourth-order Runge-Kutta integration of particle systems."""
from __future__ import annotations

from typing import Callable, Mapping, Optional

import numpy as np

from ..errors import StepRejected
from .forces import ExternalLaw, InternalLaw, ZeroExternal, ZeroInternal
from .system import MSSSystem
from .trajectory import Trajectory


def step_count(t0: float, t1: float, h: float) -> int:
    if not h > 0:
        raise ValueError("step h must be positive")
    if not t1 > t0:
        raise ValueError("interval must be non-degenerate")
    steps = (t1 - t0) / h
    n = int(round(steps))
    if abs(steps - n) > 1e-6 * max(1.0, steps):
        raise ValueError(f"interval length {t1 - t0} is not a multiple of h={h}")
    return n


def rk4_step(deriv: Callable, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = deriv(t, y)
    k2 = deriv(t + h / 2, y + h / 2 * k1)
    k3 = deriv(t + h / 2, y + h / 2 * k2)
    k4 = deriv(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def newton_rhs(ids, masses, internal: InternalLaw, external: ExternalLaw) -> Callable:
    """Right-hand side for the state ``[positions; velocities]`` of shape (2n, 3)."""
    n = len(ids)
    m = np.array([masses[p] for p in ids], dtype=float)

    def deriv(t, y):
        x, v = y[:n], y[n:]
        pos = dict(zip(ids, x))
        force = np.empty((n, 3))
        for i, p in enumerate(ids):
            total = np.asarray(external(p, t, pos, masses), dtype=float).copy()
            for j, q in enumerate(ids):
                if i != j:
                    total += internal(p, q, t, pos, masses)
            force[i] = total
        acc = force / m[:, None]
        if not np.all(np.isfinite(acc)):
            raise StepRejected(f"non-finite force at t={t:.12g}")
        return np.concatenate([v, acc])

    return deriv


def simulate(
    masses: Mapping,
    positions: Mapping,
    velocities: Mapping,
    internal: InternalLaw = ZeroInternal(),
    external: ExternalLaw = ZeroExternal(),
    h: float = 1e-3,
    interval: tuple = (0.0, 1.0),
    on_step: Optional[Callable] = None,
) -> MSSSystem:
    """Integrate Newton's equations and return the sampled system.

    ``on_step(t, state)`` is called after every accepted step and may raise to
    abort the run.
    """
    ids = tuple(masses)
    t0, t1 = map(float, interval)
    n_steps = step_count(t0, t1, h)
    y = np.concatenate(
        [np.array([positions[p] for p in ids], dtype=float), np.array([velocities[p] for p in ids], dtype=float)]
    )
    deriv = newton_rhs(ids, masses, internal, external)
    states = np.empty((n_steps + 1,) + y.shape)
    states[0] = y
    for k in range(n_steps):
        t = t0 + k * h
        y = rk4_step(deriv, t, y, h)
        if not np.all(np.isfinite(y)):
            raise StepRejected(f"non-finite state after t={t:.12g}")
        states[k + 1] = y
        if on_step is not None:
            on_step(t0 + (k + 1) * h, y)
    n = len(ids)
    trajectories = {p: Trajectory(t0, h, states[:, i], states[:, n + i]) for i, p in enumerate(ids)}
    return MSSSystem(ids, trajectories, dict(masses), internal, external)
