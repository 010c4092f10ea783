"""Router-robot kinematics and motion energy.

The robot drives in a straight line at ``v_max`` and then idles for the rest
of the planning step. While moving it draws ``k1 * v + k2`` watts, so a
displacement of ``dist`` metres costs ``k1*dist + k2*dist/v_max`` joules.
Default coefficients are stand-ins for a small wheeled research robot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# guards reachability against round-off in grid coordinates
REACH_RTOL = 1e-12


@dataclass(frozen=True)
class MotionParams:
    k1: float = 7.4   # J/m
    k2: float = 0.29  # W
    v_max: float = 1.0  # m/s

    def __post_init__(self):
        if not (self.k1 >= 0 and self.k2 >= 0):
            raise ValueError("motion coefficients k1, k2 must be >= 0")
        if not self.v_max > 0:
            raise ValueError("v_max must be > 0")

    @property
    def joules_per_metre(self) -> float:
        return self.k1 + self.k2 / self.v_max


def reachable(x_from: Sequence[float], x_to: Sequence[float], dt: float, mp: MotionParams) -> bool:
    """True iff ``x_to`` lies in the closed ball of radius ``v_max*dt`` around ``x_from``."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    radius = mp.v_max * dt
    return math.dist(x_from, x_to) <= radius * (1 + REACH_RTOL)


def motion_energy(dist, mp: MotionParams):
    """Energy in joules to drive ``dist`` metres (scalar or array)."""
    d = np.asarray(dist, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be >= 0")
    out = mp.k1 * d + mp.k2 * (d / mp.v_max)
    return float(out) if out.ndim == 0 else out
