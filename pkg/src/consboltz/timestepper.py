"""Strang splitting of transport and collision with RK2 sub-integrators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .collision import CollisionWorkspace, NonFiniteStateError, collide
from .parallel import DecompositionPlan, SerialTransport, Transport, halo_exchange
from .transport import (NGHOST, CFLViolation, WallSpec, fill_periodic_ghosts,
                        fill_physical_ghosts, transport_step)
from .velocity_grid import VelocityGrid

DEFAULT_CFL = 0.9


@dataclass(frozen=True)
class SplittingScheme:
    """Step size ``dt`` with ``dt <= cfl * min(dx) / L``."""

    dt: float
    cfl: float = DEFAULT_CFL

    @classmethod
    def for_grids(cls, min_dx: float, L: float, cfl: float = DEFAULT_CFL,
                  dt: float | None = None) -> "SplittingScheme":
        if not 0 < cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
        limit = cfl * min_dx / L
        if dt is None:
            dt = limit
        elif not 0 < dt <= limit * (1 + 1e-12):
            raise CFLViolation(f"dt={dt} exceeds cfl*min(dx)/L = {limit}")
        return cls(float(dt), cfl)


def collision_rk2(ws: CollisionWorkspace, cells: np.ndarray, dt: float, epsilon: float = 1.0,
                  step: int | None = None) -> np.ndarray:
    """Midpoint RK2 for ``df/dt = collide(f)`` applied to each cell of ``cells``.

    ``cells`` has shape ``(n, N, N, N)``; a new array is returned.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    out = np.empty_like(cells)
    for j in range(cells.shape[0]):
        f = cells[j]
        try:
            mid = f + 0.5 * dt * collide(ws, f, epsilon)
            out[j] = f + dt * collide(ws, mid, epsilon)
        except NonFiniteStateError as exc:
            raise NonFiniteStateError(f"cell {j}, step {step}: {exc}") from None
        if not np.all(np.isfinite(out[j])):
            raise NonFiniteStateError(f"cell {j}, step {step}: collision update is not finite")
    return out


@dataclass
class LocalDomain:
    """The block of spatial cells owned by one rank, with its ghosts.

    ``left_kind``/``right_kind`` choose the physical boundary treatment
    and only apply on ranks that own a physical end.
    """

    vgrid: VelocityGrid
    centers: np.ndarray
    widths: np.ndarray
    fe: np.ndarray
    plan: DecompositionPlan
    transport: Transport = field(default_factory=SerialTransport)
    left_kind: str = "zero_gradient"
    right_kind: str = "zero_gradient"
    wall_left: WallSpec | None = None
    wall_right: WallSpec | None = None
    ws: CollisionWorkspace | None = None
    epsilon: float = 1.0
    t: float = 0.0
    wall_normalization: str = "discrete"
    #: accumulated inflow of conserved quantities through the physical faces
    inflow: np.ndarray = field(default_factory=lambda: np.zeros(5))
    steps: int = 0
    messages: int = 0

    def __post_init__(self):
        n = self.plan.n_local
        if self.fe.shape[0] != n + 2 * NGHOST or self.centers.shape[0] != n + 2 * NGHOST:
            raise ValueError("field and geometry must include two ghosts per side")
        periodic = "periodic" in (self.left_kind, self.right_kind)
        if periodic and (self.left_kind != self.right_kind or self.plan.size != 1):
            raise ValueError("periodic boundaries need both ends periodic and one process")

    @property
    def interior(self) -> np.ndarray:
        return self.fe[NGHOST:-NGHOST]

    @property
    def is_left_end(self) -> bool:
        return self.plan.left is None

    @property
    def is_right_end(self) -> bool:
        return self.plan.right is None

    def fill_ghosts(self, fe: np.ndarray) -> None:
        if self.plan.size > 1:
            self.messages += halo_exchange(self.plan, fe, self.transport)
        if self.left_kind == "periodic":
            fill_periodic_ghosts(fe)
            return
        if self.is_left_end:
            fill_physical_ghosts(fe, "left", self.left_kind, self.centers, self.vgrid,
                                 self.wall_left, self.t, self.wall_normalization)
        if self.is_right_end:
            fill_physical_ghosts(fe, "right", self.right_kind, self.centers, self.vgrid,
                                 self.wall_right, self.t, self.wall_normalization)

    def advect(self, dt: float) -> None:
        res = transport_step(self.fe, self.centers, self.widths, dt, self.vgrid, self.fill_ghosts,
                             wall_left=self.is_left_end and self.left_kind == "wall",
                             wall_right=self.is_right_end and self.right_kind == "wall")
        self.fe = res.field
        if self.left_kind != "periodic":
            if self.is_left_end:
                self.inflow += res.inflow[0]
            if self.is_right_end:
                self.inflow += res.inflow[1]

    def collide_cells(self, dt: float) -> None:
        if self.ws is None or math.isinf(self.epsilon):
            return
        self.fe[NGHOST:-NGHOST] = collision_rk2(self.ws, self.interior, dt, self.epsilon, self.steps)


def strang_step(domain: LocalDomain, dt: float) -> None:
    """``T(dt/2) C(dt) T(dt/2)`` in place; ghosts are refreshed per transport stage."""
    domain.advect(0.5 * dt)
    domain.collide_cells(dt)
    domain.advect(0.5 * dt)
    domain.t += dt
    domain.steps += 1
