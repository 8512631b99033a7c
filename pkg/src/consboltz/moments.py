"""Macroscopic fields of a distribution on one spatial cell (R = 1 units)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .velocity_grid import VelocityGrid


@dataclass(frozen=True)
class MomentSet:
    rho: float
    momentum: np.ndarray
    energy: float  # rho * e = 1/2 int |v|^2 f
    velocity: np.ndarray
    temperature: float
    h_value: float
    degenerate: bool

    def conserved(self) -> np.ndarray:
        """``(rho, rho V_1, rho V_2, rho V_3, rho e)``."""
        return np.array([self.rho, *self.momentum, self.energy])


def h_functional(grid: VelocityGrid, f: np.ndarray) -> float:
    """``sum f log f omega`` over nodes with ``f > 0``."""
    f = np.asarray(f)
    pos = f > 0
    return float(np.sum(np.where(pos, f * np.log(np.where(pos, f, 1.0)), 0.0) * grid.weights))


def conserved_moments(grid: VelocityGrid, f: np.ndarray) -> np.ndarray:
    """Raw moments ``(rho, rho V, rho e)`` of one or many cells.

    ``f`` may carry leading axes; the result has shape ``f.shape[:-3] + (5,)``.
    """
    w = grid.weights
    v1, v2, v3 = grid.velocities
    fw = np.asarray(f) * w
    ax = (-3, -2, -1)
    return np.stack([
        fw.sum(axis=ax),
        (fw * v1).sum(axis=ax),
        (fw * v2).sum(axis=ax),
        (fw * v3).sum(axis=ax),
        0.5 * (fw * grid.speed2).sum(axis=ax),
    ], axis=-1)


def compute_moments(grid: VelocityGrid, f: np.ndarray) -> MomentSet:
    f = grid._check(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("distribution contains non-finite values")
    rho, m1, m2, m3, energy = conserved_moments(grid, f)
    momentum = np.array([m1, m2, m3])
    degenerate = not rho > 0
    if degenerate:
        velocity = np.zeros(3)
        temperature = 0.0
    else:
        velocity = momentum / rho
        temperature = (2.0 * energy / rho - velocity @ velocity) / 3.0
    return MomentSet(float(rho), momentum, float(energy), velocity, float(temperature),
                     h_functional(grid, f), degenerate)
