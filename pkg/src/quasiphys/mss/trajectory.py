"""Uniformly sampled trajectories and their finite-difference derivatives."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from ..errors import OutOfInterval

MIN_SAMPLES = 5
# times closer than this fraction of a step to a sample are treated as on-grid
GRID_SNAP = 1e-9


def second_derivative(samples: np.ndarray, h: float) -> np.ndarray:
    """Second derivative at every sample.

    Interior points use the 5-point central stencil; the two points at each
    end use the 4-point one-sided stencil.
    """
    f = np.asarray(samples, dtype=float)
    n = len(f)
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    for i in (0, 1):
        out[i] = (2 * f[i] - 5 * f[i + 1] + 4 * f[i + 2] - f[i + 3]) / (h * h)
    for i in (n - 2, n - 1):
        out[i] = (2 * f[i] - 5 * f[i - 1] + 4 * f[i - 2] - f[i - 3]) / (h * h)
    return out


def first_derivative(samples: np.ndarray, h: float) -> np.ndarray:
    f = np.asarray(samples, dtype=float)
    n = len(f)
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    for i in (0, 1):
        out[i] = (-11 * f[i] + 18 * f[i + 1] - 9 * f[i + 2] + 2 * f[i + 3]) / (6 * h)
    for i in (n - 2, n - 1):
        out[i] = (11 * f[i] - 18 * f[i - 1] + 9 * f[i - 2] - 2 * f[i - 3]) / (6 * h)
    return out


def _cubic_weights(x: float) -> np.ndarray:
    # Lagrange weights for nodes -1, 0, 1, 2 evaluated at x in [0, 1]
    return np.array(
        [
            -x * (x - 1) * (x - 2) / 6,
            (x + 1) * (x - 1) * (x - 2) / 2,
            -(x + 1) * x * (x - 2) / 2,
            (x + 1) * x * (x - 1) / 6,
        ]
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Positions sampled every ``h`` seconds from ``t0``.

    ``velocities`` may be supplied by an integrator; otherwise they are
    estimated by finite differences.
    """

    t0: float
    h: float
    samples: np.ndarray
    velocities: Optional[np.ndarray] = None

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 3:
            raise ValueError("samples must have shape (N, 3)")
        if len(s) < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples")
        if not self.h > 0:
            raise ValueError("step h must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "h", float(self.h))
        if self.velocities is not None:
            v = np.array(self.velocities, dtype=float)
            if v.shape != s.shape:
                raise ValueError("velocities must match samples")
            v.setflags(write=False)
            object.__setattr__(self, "velocities", v)

    @classmethod
    def from_function(cls, fn: Callable[[float], np.ndarray], t0: float, t1: float, h: float):
        n = int(round((t1 - t0) / h)) + 1
        times = t0 + h * np.arange(n)
        return cls(t0, h, np.array([fn(t) for t in times], dtype=float))

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def t1(self) -> float:
        return self.t0 + self.h * (self.n - 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n)

    @cached_property
    def accelerations(self) -> np.ndarray:
        return second_derivative(self.samples, self.h)

    @cached_property
    def _velocity_table(self) -> np.ndarray:
        if self.velocities is not None:
            return self.velocities
        return first_derivative(self.samples, self.h)

    def locate(self, t: float) -> tuple[int, float]:
        """Split ``t`` into a sample index and a fractional offset in [0, 1)."""
        x = (t - self.t0) / self.h
        if x < -GRID_SNAP or x > self.n - 1 + GRID_SNAP:
            raise OutOfInterval(f"t={t} outside [{self.t0}, {self.t1}]")
        k = round(x)
        if abs(x - k) <= GRID_SNAP:
            return int(k), 0.0
        i = int(np.floor(x))
        return i, x - i

    def _interp(self, table: np.ndarray, t: float) -> np.ndarray:
        i, frac = self.locate(t)
        if frac == 0.0:
            return table[i].copy()
        lo = min(max(i - 1, 0), self.n - 4)
        return _cubic_weights(frac + (i - lo) - 1) @ table[lo:lo + 4]

    def position(self, t: float) -> np.ndarray:
        return self._interp(self.samples, t)

    def velocity(self, t: float) -> np.ndarray:
        return self._interp(self._velocity_table, t)

    def acceleration(self, t: float) -> np.ndarray:
        return self._interp(self.accelerations, t)

    def same_grid(self, other: "Trajectory") -> bool:
        return self.n == other.n and np.isclose(self.t0, other.t0) and np.isclose(self.h, other.h)


def accel(s: Trajectory, t: float) -> np.ndarray:
    """Second time derivative of ``s`` at ``t``."""
    return s.acceleration(t)
