"""Built-in experiments and initial data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .transport import SpatialGrid, WallSpec
from .velocity_grid import VelocityGrid


def maxwellian(grid: VelocityGrid, rho: float, V=(0.0, 0.0, 0.0), T: float = 1.0) -> np.ndarray:
    """``rho / (2 pi T)^{3/2} exp(-|v - V|^2 / 2T)`` sampled on the lattice."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    if rho < 0:
        raise ValueError(f"density must be nonnegative, got {rho}")
    v1, v2, v3 = grid.velocities
    d2 = (v1 - V[0]) ** 2 + (v2 - V[1]) ** 2 + (v3 - V[2]) ** 2
    return rho / (2.0 * np.pi * T) ** 1.5 * np.exp(-d2 / (2.0 * T))


def bimodal_mixture(grid: VelocityGrid, shift: float = 1.0, T: float = 0.5,
                    axis: int = 0) -> np.ndarray:
    """Equal-weight sum of two Maxwellians drifting at ``+-shift`` along ``axis``.

    Total density 1 and zero bulk velocity.
    """
    V = np.zeros(3)
    V[axis] = shift
    return 0.5 * (maxwellian(grid, 1.0, V, T) + maxwellian(grid, 1.0, -V, T))


def marginal_distribution(grid: VelocityGrid, f: np.ndarray) -> np.ndarray:
    """``g(v_1) = sum_{v_2, v_3} f omega_2 omega_3``."""
    f = grid._check(f)
    c = grid.quad_coeffs
    w23 = grid.dv**2 * np.multiply.outer(c, c)
    return np.einsum("ijk,jk->i", f, w23)


def default_velocity_halfwidth(T_max: float, safety: float = 1.25) -> float:
    """Velocity cube half-width ``L = 2 sqrt(2 T_max) * safety``."""
    if not T_max > 0:
        raise ValueError("T_max must be positive")
    return 2.0 * math.sqrt(2.0 * T_max) * safety


@dataclass(frozen=True)
class Scenario:
    name: str
    spatial: SpatialGrid | None  # None for a single homogeneous cell
    initial: Callable[[VelocityGrid, np.ndarray], np.ndarray] = field(repr=False)
    lam: float
    epsilon: float
    end_time: float
    T_max: float
    left_kind: str = "zero_gradient"
    right_kind: str = "zero_gradient"
    wall_left: WallSpec | None = None
    wall_right: WallSpec | None = None
    dt: float | None = None  # only used without transport
    #: spatial interval whose cells are sampled for marginal output
    marginal_window: tuple[float, float] | None = None

    @property
    def homogeneous(self) -> bool:
        return self.spatial is None

    def initial_field(self, grid: VelocityGrid, centers: np.ndarray | None = None) -> np.ndarray:
        """Initial cell averages, shape ``(n_cells, N, N, N)``."""
        if centers is None:
            centers = np.zeros(1) if self.spatial is None else self.spatial.centers
        f0 = np.asarray(self.initial(grid, np.asarray(centers)), dtype=float)
        if f0.shape != (len(centers),) + grid.shape:
            raise ValueError("initial state has the wrong shape")
        return f0


def relaxation_0d(shift: float = 1.0, T: float = 0.5, lam: float = 0.0, epsilon: float = 1.0,
                  end_time: float = 50.0, dt: float = 0.1) -> Scenario:
    """Homogeneous relaxation of a two-beam mixture towards its Maxwellian."""
    if not T > 0:
        raise ValueError("beam temperature must be positive")

    def initial(grid, centers):
        return np.broadcast_to(bimodal_mixture(grid, shift, T), (len(centers),) + grid.shape).copy()

    T_eq = T + shift**2 / 3.0
    return Scenario("relaxation_0d", None, initial, lam, epsilon, end_time,
                    T_max=max(T_eq, T + shift**2), dt=dt)


def sudden_wall_scenario(ratio: float, T_before: float = 1.0, length: float = 12.0,
                         fine_length: float = 1.0, fine_per_mfp: int = 8, coarse_per_mfp: int = 2,
                         mfp: float = 1.0, lam: float = 1.0, epsilon: float = 1.0,
                         end_time: float = 5.0, far_boundary: str = "zero_gradient",
                         name: str | None = None) -> Scenario:
    """Gas at rest next to a wall at ``x = 0`` whose temperature jumps at ``t = 0``.

    The wall goes from ``T_before`` to ``ratio * T_before``; the gas starts
    in equilibrium with the old wall temperature.
    """
    if not ratio > 0:
        raise ValueError(f"temperature ratio must be positive, got {ratio}")
    if not T_before > 0:
        raise ValueError("initial temperature must be positive")
    spatial = SpatialGrid.refined(length, fine_length, fine_per_mfp, coarse_per_mfp, mfp)
    wall = WallSpec(T_before, ratio * T_before, normal=1)

    def initial(grid, centers):
        return np.broadcast_to(maxwellian(grid, 1.0, (0.0, 0.0, 0.0), T_before),
                               (len(centers),) + grid.shape).copy()

    if name is None:
        name = "sudden_heating" if ratio >= 1 else "sudden_cooling"
    return Scenario(name, spatial, initial, lam, epsilon, end_time,
                    T_max=max(T_before, ratio * T_before), left_kind="wall",
                    right_kind=far_boundary, wall_left=wall,
                    marginal_window=(0.0, fine_length))


def sudden_heating_scenario(ratio: float = 2.0, **kw) -> Scenario:
    return sudden_wall_scenario(ratio, **kw)


def sudden_cooling_scenario(ratio: float = 0.5, **kw) -> Scenario:
    return sudden_wall_scenario(ratio, **kw)


SCENARIOS = {
    "relaxation_0d": relaxation_0d,
    "sudden_heating": sudden_heating_scenario,
    "sudden_cooling": sudden_cooling_scenario,
}
