"""Closed-form two-body quantities used to check simulations."""
from __future__ import annotations

import math

import numpy as np

from .system import MSSSystem


def circular_two_body(m1: float, m2: float, separation: float, gamma: float = 1.0, ids=("p1", "p2")):
    """Masses, positions and velocities for a circular orbit about the origin.

    The centre of mass sits at rest at the origin.
    """
    omega = math.sqrt(gamma * (m1 + m2) / separation**3)
    r1 = separation * m2 / (m1 + m2)
    r2 = separation * m1 / (m1 + m2)
    a, b = ids
    masses = {a: float(m1), b: float(m2)}
    positions = {a: np.array([r1, 0.0, 0.0]), b: np.array([-r2, 0.0, 0.0])}
    velocities = {a: np.array([0.0, omega * r1, 0.0]), b: np.array([0.0, -omega * r2, 0.0])}
    return masses, positions, velocities


def kepler_period(m1: float, m2: float, semi_major: float, gamma: float = 1.0) -> float:
    return 2 * math.pi * math.sqrt(semi_major**3 / (gamma * (m1 + m2)))


def free_fall_time(m1: float, m2: float, separation: float, gamma: float = 1.0) -> float:
    """Collision time of two bodies released at rest."""
    return math.pi / 2 * math.sqrt(separation**3 / (2 * gamma * (m1 + m2)))


def measured_period(sys: MSSSystem, a, b) -> float:
    """First time the a-b separation vector sweeps a full turn in the xy-plane."""
    ta, tb = sys.trajectories[a], sys.trajectories[b]
    rel = ta.samples - tb.samples
    angle = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    swept = np.abs(angle - angle[0])
    idx = np.flatnonzero(swept >= 2 * math.pi)
    if len(idx) == 0:
        raise ValueError("the orbit does not complete a turn within the interval")
    k = idx[0]
    frac = (2 * math.pi - swept[k - 1]) / (swept[k] - swept[k - 1])
    times = ta.times
    return float(times[k - 1] + frac * (times[k] - times[k - 1]))
