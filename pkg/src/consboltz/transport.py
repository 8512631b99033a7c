"""Finite-volume advection in one space dimension.

Cell averages live in arrays of shape ``(n_local + 4, N, N, N)``: two ghost
cells on each side (indices 0, 1 and n_local+2, n_local+3) around the
interior block. Faces use upwind fluxes of a minmod-limited linear
reconstruction with each cell's own half-width, so the scheme stays second
order on nonuniform grids. Time stepping is the two-stage SSP Runge-Kutta
method; ghosts are refilled before every stage.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .velocity_grid import VelocityGrid

NGHOST = 2

#: Courant number above which a forward-Euler stage is rejected
COURANT_LIMIT = 1.0

BOUNDARY_KINDS = ("wall", "zero_gradient", "extrapolate", "periodic")


class CFLViolation(ValueError):
    pass


class WallStateError(RuntimeError):
    """Raised when the outgoing wall flux has the wrong sign."""


# --------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class SpatialGrid:
    centers: np.ndarray
    widths: np.ndarray
    description: str = ""

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        w = np.asarray(self.widths, dtype=float)
        if c.ndim != 1 or c.shape != w.shape or c.size == 0:
            raise ValueError("centers and widths must be equal-length 1-D arrays")
        if np.any(w <= 0):
            raise ValueError("cell widths must be positive")
        if c.size > 1:
            gap = np.diff(c) - 0.5 * (w[1:] + w[:-1])
            if np.any(np.diff(c) <= 0) or np.max(np.abs(gap)) > 1e-12 * max(1.0, np.abs(c).max()):
                raise ValueError("cells must be ordered and tile the interval without gaps")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)

    @classmethod
    def from_edges(cls, edges, description: str = "") -> "SpatialGrid":
        e = np.asarray(edges, dtype=float)
        return cls(0.5 * (e[1:] + e[:-1]), np.diff(e), description)

    @classmethod
    def uniform(cls, x0: float, x1: float, n: int) -> "SpatialGrid":
        return cls.from_edges(np.linspace(x0, x1, n + 1), f"uniform {n} cells on [{x0}, {x1}]")

    @classmethod
    def refined(cls, length: float, fine_length: float, fine_per_mfp: int = 8,
                coarse_per_mfp: int = 2, mfp: float = 1.0) -> "SpatialGrid":
        """Fine cells on ``[0, fine_length]`` then coarse cells up to ``length``.

        The width changes abruptly at ``fine_length``.
        """
        if not 0 < fine_length <= length:
            raise ValueError("need 0 < fine_length <= length")
        n_fine = int(round(fine_length * fine_per_mfp / mfp))
        n_coarse = int(round((length - fine_length) * coarse_per_mfp / mfp))
        if n_fine < 1:
            raise ValueError("fine zone holds no cells")
        edges = np.concatenate([
            np.linspace(0.0, fine_length, n_fine + 1),
            np.linspace(fine_length, length, n_coarse + 1)[1:] if n_coarse else [],
        ])
        return cls.from_edges(edges, f"{n_fine} fine + {n_coarse} coarse cells on [0, {length}]")

    @property
    def n_cells(self) -> int:
        return self.centers.size

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate([[self.centers[0] - 0.5 * self.widths[0]],
                               self.centers + 0.5 * self.widths])

    def extended(self) -> tuple[np.ndarray, np.ndarray]:
        """Centers and widths with two mirrored ghost cells at each end."""
        w = np.concatenate([[self.widths[0]] * NGHOST, self.widths, [self.widths[-1]] * NGHOST])
        left = self.centers[0] - self.widths[0] * np.array([2.0, 1.0])
        right = self.centers[-1] + self.widths[-1] * np.array([1.0, 2.0])
        return np.concatenate([left, self.centers, right]), w

    def local_geometry(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        c, w = self.extended()
        return c[start:stop + 2 * NGHOST], w[start:stop + 2 * NGHOST]


# --------------------------------------------------------------------------
# walls


@dataclass(frozen=True)
class WallSpec:
    """Diffusely reflecting wall; ``normal`` is +1 (left wall) or -1 (right wall)."""

    T_before: float
    T_after: float
    normal: int = 1
    V_w: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.T_before > 0 and self.T_after > 0):
            raise ValueError("wall temperatures must be positive")
        if self.normal not in (1, -1):
            raise ValueError("normal must be +1 or -1")
        if self.V_w[0] != 0.0:
            raise ValueError("wall velocity must be tangential (V_w[0] == 0)")

    def temperature(self, t: float) -> float:
        return self.T_before if t < 0 else self.T_after


def wall_maxwellian(grid: VelocityGrid, wall: WallSpec, T: float) -> np.ndarray:
    """Unit-density wall Maxwellian on incoming nodes, zero elsewhere."""
    v1, v2, v3 = grid.velocities
    Vw = wall.V_w
    rel2 = (v1 - Vw[0]) ** 2 + (v2 - Vw[1]) ** 2 + (v3 - Vw[2]) ** 2
    incoming = wall.normal * (v1 - Vw[0]) > 0
    return np.where(incoming, np.exp(-rel2 / (2.0 * T)) / (2.0 * np.pi * T) ** 1.5, 0.0)


def wall_boundary(f_adjacent: np.ndarray, wall: WallSpec, grid: VelocityGrid, t: float = 0.0,
                  normalization: str = "discrete") -> tuple[np.ndarray, float]:
    """Ghost contents and ``sigma_w`` for a diffusive wall next to ``f_adjacent``.

    ``sigma_w`` rescales the wall Maxwellian to re-emit what leaves through
    the wall. ``normalization="analytic"`` uses the continuum half-space flux
    ``sqrt(T_w / 2 pi)``; ``"discrete"`` divides by the lattice quadrature of
    the same flux so the wall is exactly impermeable on the lattice.
    Grazing nodes count as outgoing.
    """
    T = wall.temperature(t)
    v1 = grid.velocities[0]
    vn = wall.normal * (v1 - wall.V_w[0])
    w = grid.weights
    outgoing = np.broadcast_to(vn <= 0, grid.shape)
    absorbed = -np.sum(np.where(outgoing, vn * f_adjacent, 0.0) * w)
    shape = wall_maxwellian(grid, wall, T)
    if normalization == "discrete":
        emitted_unit = np.sum(vn * shape * w)
        sigma_w = absorbed / emitted_unit
    elif normalization == "analytic":
        sigma_w = np.sqrt(2.0 * np.pi / T) * absorbed
    else:
        raise ValueError(f"unknown wall normalization {normalization!r}")
    if sigma_w < 0:
        raise WallStateError(f"negative re-emission weight sigma_w={sigma_w:.3e}")
    return sigma_w * shape, float(sigma_w)


# --------------------------------------------------------------------------
# reconstruction and fluxes


def minmod3(a, b, c):
    """Zero on sign disagreement, otherwise the smallest-magnitude argument."""
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    s = np.sign(a)
    agree = (s == np.sign(b)) & (s == np.sign(c))
    m = np.minimum(np.abs(a), np.minimum(np.abs(b), np.abs(c)))
    return np.where(agree, s * m, 0.0)


def reconstruct_slopes(fe: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Limited slopes for every cell with two neighbours (indices 1..n-2).

    Returns an array of length ``len(fe) - 2``; entry ``i`` is the slope of
    cell ``i + 1``.
    """
    shape = (-1,) + (1,) * (fe.ndim - 1)
    fwd = np.diff(fe, axis=0) / np.diff(centers).reshape(shape)
    central = (fe[2:] - fe[:-2]) / (centers[2:] - centers[:-2]).reshape(shape)
    return minmod3(fwd[1:], fwd[:-1], central)


def upwind_flux(vel, left, right):
    """``v * left`` for ``v >= 0``, ``v * right`` otherwise."""
    return vel * np.where(vel >= 0, left, right)


@dataclass
class FaceFluxes:
    dfdt: np.ndarray  # interior rate of change
    left: np.ndarray  # flux through the first interior cell's left face
    right: np.ndarray  # flux through the last interior cell's right face


def flux_divergence(fe: np.ndarray, centers: np.ndarray, widths: np.ndarray, v1: np.ndarray,
                    wall_left: bool = False, wall_right: bool = False) -> FaceFluxes:
    """Semi-discrete transport operator on the interior of ``fe``.

    ``fe`` includes ghosts. Faces touching a wall use the unreconstructed
    cell averages on both sides.
    """
    shape = (-1,) + (1,) * (fe.ndim - 1)
    sigma = reconstruct_slopes(fe, centers)  # cells 1 .. n+2
    half = (0.5 * widths[1:-1]).reshape(shape)
    plus = fe[1:-1] + half * sigma  # right-face value of cells 1 .. n+2
    minus = fe[1:-1] - half * sigma  # left-face value of cells 1 .. n+2
    left_state = plus[:-1]  # faces 1.5 .. n+1.5
    right_state = minus[1:]
    if wall_left:
        left_state = left_state.copy()
        right_state = right_state.copy()
        left_state[0] = fe[1]
        right_state[0] = fe[2]
    if wall_right:
        left_state = left_state.copy()
        right_state = right_state.copy()
        left_state[-1] = fe[-3]
        right_state[-1] = fe[-2]
    F = upwind_flux(v1, left_state, right_state)
    dfdt = -(F[1:] - F[:-1]) / widths[NGHOST:-NGHOST].reshape(shape)
    return FaceFluxes(dfdt, F[0], F[-1])


def max_courant(dt: float, widths: np.ndarray, grid: VelocityGrid) -> float:
    return dt * np.max(np.abs(grid.v_nodes)) / np.min(widths)


@dataclass
class TransportResult:
    field: np.ndarray
    #: time-integrated inflow of (mass, momentum x3, energy) through the
    #: local left and right faces, shape (2, 5)
    inflow: np.ndarray


def face_moments(grid: VelocityGrid, flux: np.ndarray) -> np.ndarray:
    from .moments import conserved_moments

    return conserved_moments(grid, flux)


def transport_step(fe: np.ndarray, centers: np.ndarray, widths: np.ndarray, dt: float,
                   grid: VelocityGrid, fill_ghosts: Callable[[np.ndarray], None],
                   wall_left: bool = False, wall_right: bool = False) -> TransportResult:
    """Advance the interior by ``dt`` with two-stage SSP Runge-Kutta.

    ``fill_ghosts`` is called on the working array before each stage (halo
    exchange and physical boundaries). Each stage is the conservative
    update ``f_j -= dt/dx_j (F_{j+1/2} - F_{j-1/2})``.
    """
    nu = max_courant(dt, widths, grid)
    if nu > COURANT_LIMIT:
        raise CFLViolation(f"Courant number {nu:.3f} exceeds {COURANT_LIMIT}")
    v1 = grid.velocities[0]
    interior = slice(NGHOST, -NGHOST)

    work = fe.copy()
    fill_ghosts(work)
    s1 = flux_divergence(work, centers, widths, v1, wall_left, wall_right)
    stage = work.copy()
    stage[interior] += dt * s1.dfdt
    fill_ghosts(stage)
    s2 = flux_divergence(stage, centers, widths, v1, wall_left, wall_right)
    out = work.copy()
    out[interior] = 0.5 * (work[interior] + stage[interior] + dt * s2.dfdt)

    left = 0.5 * dt * (s1.left + s2.left)
    right = 0.5 * dt * (s1.right + s2.right)
    inflow = np.stack([face_moments(grid, left), -face_moments(grid, right)])
    return TransportResult(out, inflow)


# --------------------------------------------------------------------------
# physical boundary ghost fills


def fill_physical_ghosts(fe: np.ndarray, side: str, kind: str, centers: np.ndarray,
                         grid: VelocityGrid, wall: WallSpec | None = None, t: float = 0.0,
                         normalization: str = "discrete") -> float | None:
    """Fill the two ghosts on ``side`` ("left"/"right") of ``fe`` in place.

    Returns ``sigma_w`` for walls, ``None`` otherwise. Periodic ghosts are
    filled by :func:`fill_periodic_ghosts`.
    """
    if side == "left":
        g_near, g_far, b_near, b_next = 1, 0, 2, 3
    elif side == "right":
        g_near, g_far, b_near, b_next = -2, -1, -3, -4
    else:
        raise ValueError(side)
    if kind == "wall":
        if wall is None:
            raise ValueError("wall boundary needs a WallSpec")
        ghost, sigma_w = wall_boundary(fe[b_near], wall, grid, t, normalization)
        fe[g_near] = ghost
        fe[g_far] = ghost
        return sigma_w
    if kind == "zero_gradient":
        fe[g_near] = fe[b_near]
        fe[g_far] = fe[b_near]
    elif kind == "extrapolate":
        slope = (fe[b_near] - fe[b_next]) / (centers[b_near] - centers[b_next])
        fe[g_near] = fe[b_near] + (centers[g_near] - centers[b_near]) * slope
        fe[g_far] = fe[b_near] + (centers[g_far] - centers[b_near]) * slope
    else:
        raise ValueError(f"unknown boundary kind {kind!r}")
    return None


def fill_periodic_ghosts(fe: np.ndarray) -> None:
    fe[0], fe[1] = fe[-4], fe[-3]
    fe[-2], fe[-1] = fe[2], fe[3]
