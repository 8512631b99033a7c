"""Centered velocity / Fourier lattices and the matching discrete transforms.

The velocity lattice is ``v_k = dv (k - N/2)`` on the cube ``[-L, L)^3`` and
the Fourier lattice is ``zeta_k = dzeta (k - N/2)`` with ``dzeta = pi / L``,
so that ``dv * dzeta = 2 pi / N`` and both transforms reduce to an index-space
FFT wrapped in sign flips.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SQRT_2PI = np.sqrt(2.0 * np.pi)

#: endpoint treatments for the per-axis trapezoid coefficients
ENDPOINT_RULES = ("periodic", "trapezoid")


@dataclass(frozen=True)
class VelocityGrid:
    N: int
    L: float
    endpoint: str = "periodic"
    dv: float = field(init=False)
    dzeta: float = field(init=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 4, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.endpoint not in ENDPOINT_RULES:
            raise ValueError(f"endpoint must be one of {ENDPOINT_RULES}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "dv", 2.0 * self.L / self.N)
        object.__setattr__(self, "dzeta", np.pi / self.L)

    @property
    def half(self) -> int:
        return self.N // 2

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.N, self.N, self.N)

    @cached_property
    def v_nodes(self) -> np.ndarray:
        return self.dv * (np.arange(self.N) - self.half)

    @cached_property
    def zeta_nodes(self) -> np.ndarray:
        return self.dzeta * (np.arange(self.N) - self.half)

    @cached_property
    def quad_coeffs(self) -> np.ndarray:
        """Per-axis trapezoid coefficients.

        ``periodic`` closes the lattice with the (vanishing) value at ``+L``
        identified with ``-L``, which makes every coefficient 1. ``trapezoid``
        halves the first and last lattice nodes.
        """
        c = np.ones(self.N)
        if self.endpoint == "trapezoid":
            c[0] = c[-1] = 0.5
        c.flags.writeable = False
        return c

    @cached_property
    def coeffs3(self) -> np.ndarray:
        c = self.quad_coeffs
        return c[:, None, None] * c[None, :, None] * c[None, None, :]

    @cached_property
    def weights(self) -> np.ndarray:
        """3-D velocity quadrature weights ``omega_m`` (includes ``dv^3``)."""
        return self.dv**3 * self.coeffs3

    @cached_property
    def fourier_weights(self) -> np.ndarray:
        """3-D Fourier quadrature weights (includes ``dzeta^3``)."""
        return self.dzeta**3 * self.coeffs3

    @cached_property
    def velocities(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable ``(v1, v2, v3)`` component arrays."""
        v = self.v_nodes
        return v[:, None, None], v[None, :, None], v[None, None, :]

    @cached_property
    def speed2(self) -> np.ndarray:
        v1, v2, v3 = self.velocities
        return v1**2 + v2**2 + v3**2

    @cached_property
    def _phase(self) -> np.ndarray:
        # (-1)^(k1+k2+k3)
        s = (-1.0) ** np.arange(self.N)
        return s[:, None, None] * s[None, :, None] * s[None, None, :]

    @property
    def _phase_const(self) -> float:
        return (-1.0) ** (3 * self.half)

    def _check(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a)
        if a.shape != self.shape:
            raise ValueError(f"expected array of shape {self.shape}, got {a.shape}")
        return a


def build_grid(N: int, L: float, endpoint: str = "periodic") -> VelocityGrid:
    return VelocityGrid(N, L, endpoint)


def forward_transform(grid: VelocityGrid, f: np.ndarray) -> np.ndarray:
    """``fhat(zeta_k) = (dv/sqrt(2pi))^3 sum_m c_m f(v_m) exp(-i zeta_k . v_m)``."""
    f = grid._check(f)
    sign = grid._phase
    # zeta_k.v_m = (2pi/N)(k-N/2)(m-N/2): the (-1)^m factor goes in, (-1)^k and
    # the constant (-1)^(N/2) per axis come out.
    out = np.fft.fftn(sign * grid.coeffs3 * f)
    out *= sign * (grid._phase_const * (grid.dv / SQRT_2PI) ** 3)
    return out


def inverse_transform(grid: VelocityGrid, g: np.ndarray, return_residual: bool = False):
    """Real part of ``(dzeta/sqrt(2pi))^3 sum_m c_m g(zeta_m) exp(+i v_k . zeta_m)``.

    With ``return_residual`` the largest discarded imaginary magnitude is
    returned as well.
    """
    g = grid._check(g)
    sign = grid._phase
    out = np.fft.ifftn(sign * grid.coeffs3 * g)
    out *= sign * (grid._phase_const * grid.N**3 * (grid.dzeta / SQRT_2PI) ** 3)
    if return_residual:
        return out.real.copy(), float(np.max(np.abs(out.imag), initial=0.0))
    return out.real.copy()
