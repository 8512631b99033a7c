"""Spectral collision operator on a single spatial cell.

``collide`` runs the pipeline

    f --FFT--> fhat --weighted convolution--> Qhat --inverse FFT--> Q~ --projection--> Q

The convolution costs ``O(N^6)`` and is the hot loop of the whole solver; it
is a numba kernel over a contiguous block of ``zeta_k`` rows, driven by a
:class:`~consboltz.parallel.WorkerTeam`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import roots_legendre

from .parallel import WorkerTeam
from .velocity_grid import VelocityGrid, forward_transform, inverse_transform
from .weights import KernelSpec, WeightTable


class NonFiniteStateError(FloatingPointError):
    pass


@numba.njit(nogil=True, cache=True)
def _qhat_rows(G, a, fhat, N, k_start, k_stop, out):
    h = N // 2
    NN = N * N
    for kf in range(k_start, k_stop):
        k1 = kf // NN
        k2 = (kf // N) % N
        k3 = kf % N
        lo1 = max(0, k1 - h + 1)
        hi1 = min(N - 1, k1 + h)
        lo2 = max(0, k2 - h + 1)
        hi2 = min(N - 1, k2 + h)
        lo3 = max(0, k3 - h + 1)
        hi3 = min(N - 1, k3 + h)
        acc_re = 0.0
        acc_im = 0.0
        for m1 in range(lo1, hi1 + 1):
            s1 = k1 - m1 + h
            for m2 in range(lo2, hi2 + 1):
                s2 = k2 - m2 + h
                row = (m1 * N + m2) * N
                for m3 in range(lo3, hi3 + 1):
                    s3 = k3 - m3 + h
                    g = G[kf, row + m3]
                    x = a[m1, m2, m3]
                    y = fhat[s1, s2, s3]
                    acc_re += g * (x.real * y.real - x.imag * y.imag)
                    acc_im += g * (x.real * y.imag + x.imag * y.real)
        out[kf] = complex(acc_re, acc_im)


def evaluate_qhat(grid: VelocityGrid, table: WeightTable, fhat: np.ndarray,
                  team: WorkerTeam | None = None, out: np.ndarray | None = None) -> np.ndarray:
    """``Qhat(zeta_k) = sum_m Ghat(xi_m, zeta_k) fhat(xi_m) fhat(zeta_k - xi_m) omega_m``.

    ``fhat(zeta_k - xi_m)`` is taken as zero when the shifted index leaves the
    lattice; nothing is periodized.
    """
    if table.N != grid.N or table.L != grid.L:
        raise ValueError(f"table is for (N, L) = {table.grid_id}, grid is ({grid.N}, {grid.L})")
    fhat = np.ascontiguousarray(fhat, dtype=np.complex128)
    grid._check(fhat)
    a = np.ascontiguousarray(fhat * grid.fourier_weights)
    M = grid.N**3
    if out is None:
        out = np.empty(M, dtype=np.complex128)
    flat = out.reshape(M)

    def work(start: int, stop: int) -> None:
        _qhat_rows(table.values, a, fhat, grid.N, start, stop, flat)

    if team is None:
        work(0, M)
    else:
        team.map_ranges(work, M)
    return flat.reshape(grid.shape)


# --------------------------------------------------------------------------
# conservation


@dataclass
class ConservationOperator:
    """Least-squares projection onto ``{Q : C Q = 0}``.

    ``C`` is the 5 x M integration matrix with rows ``omega``, ``v^i omega``
    and ``|v|^2 omega``.
    """

    C: np.ndarray
    gram: tuple = field(repr=False)

    @classmethod
    def for_grid(cls, grid: VelocityGrid) -> "ConservationOperator":
        w = grid.weights
        v1, v2, v3 = grid.velocities
        C = np.stack([np.broadcast_to(x * w, grid.shape).ravel()
                      for x in (1.0, v1, v2, v3, grid.speed2)])
        return cls(C, cho_factor(C @ C.T))

    def apply(self, q_raw: np.ndarray) -> np.ndarray:
        q = np.asarray(q_raw, dtype=float)
        flat = q.reshape(-1)
        lagrange = cho_solve(self.gram, self.C @ flat)
        return (flat - self.C.T @ lagrange).reshape(q.shape)


def conserve(op: ConservationOperator, q_raw: np.ndarray) -> np.ndarray:
    """``Q = Q~ - C^T (C C^T)^-1 C Q~``."""
    return op.apply(q_raw)


# --------------------------------------------------------------------------
# full operator


@dataclass
class CollisionWorkspace:
    grid: VelocityGrid
    table: WeightTable
    conservation: ConservationOperator
    qhat: np.ndarray
    team: WorkerTeam | None = None

    @classmethod
    def create(cls, grid: VelocityGrid, table: WeightTable,
               team: WorkerTeam | None = None) -> "CollisionWorkspace":
        return cls(grid, table, ConservationOperator.for_grid(grid),
                   np.empty(grid.shape, dtype=np.complex128), team)


def collision_raw(ws: CollisionWorkspace, f: np.ndarray) -> np.ndarray:
    """Unprojected ``Q~(f, f)`` on the velocity lattice."""
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise NonFiniteStateError("collision input contains non-finite values")
    fhat = forward_transform(ws.grid, f)
    qhat = evaluate_qhat(ws.grid, ws.table, fhat, ws.team, out=ws.qhat)
    return inverse_transform(ws.grid, qhat)


def collide(ws: CollisionWorkspace, f: np.ndarray, epsilon: float = 1.0) -> np.ndarray:
    """``(1/epsilon) P_N Q~(f, f)``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return conserve(ws.conservation, collision_raw(ws, f)) / epsilon


# --------------------------------------------------------------------------
# physical-space oracle

#: the direct oracle costs O(N^6 * angular points); larger lattices are refused
ORACLE_MAX_N = 12


def sphere_rule(n_polar: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^2: Gauss-Legendre in cos(theta), ``2 n_polar`` azimuths.

    Weights sum to ``4 pi``.
    """
    x, w = roots_legendre(n_polar)
    n_az = 2 * n_polar
    phi = 2.0 * np.pi * (np.arange(n_az) + 0.5) / n_az
    ct = np.repeat(x, n_az)
    st = np.sqrt(1.0 - ct**2)
    ph = np.tile(phi, n_polar)
    sigma = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
    return sigma, np.repeat(w, n_az) * (2.0 * np.pi / n_az)


@numba.njit(nogil=True, cache=True)
def _trilinear(f, x, y, z):
    # index-space coordinates; values beyond the lattice are zero
    N = f.shape[0]
    i0 = int(np.floor(x))
    j0 = int(np.floor(y))
    k0 = int(np.floor(z))
    tx = x - i0
    ty = y - j0
    tz = z - k0
    acc = 0.0
    for di in range(2):
        i = i0 + di
        if i < 0 or i >= N:
            continue
        wx = tx if di else 1.0 - tx
        for dj in range(2):
            j = j0 + dj
            if j < 0 or j >= N:
                continue
            wy = ty if dj else 1.0 - ty
            for dk in range(2):
                k = k0 + dk
                if k < 0 or k >= N:
                    continue
                wz = tz if dk else 1.0 - tz
                acc += wx * wy * wz * f[i, j, k]
    return acc


@numba.njit(nogil=True, cache=True)
def _oracle_kernel(f, v, w, sigma, sw, lam, L, dv, out):
    M = v.shape[0]
    S = sigma.shape[0]
    fv = f.ravel()
    total_sw = 0.0
    for s in range(S):
        total_sw += sw[s]
    for j in range(M):
        acc = 0.0
        for i in range(M):
            u0 = v[j, 0] - v[i, 0]
            u1 = v[j, 1] - v[i, 1]
            u2 = v[j, 2] - v[i, 2]
            speed = np.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
            c0 = 0.5 * (v[j, 0] + v[i, 0])
            c1 = 0.5 * (v[j, 1] + v[i, 1])
            c2 = 0.5 * (v[j, 2] + v[i, 2])
            gain = 0.0
            for s in range(S):
                h0 = 0.5 * speed * sigma[s, 0]
                h1 = 0.5 * speed * sigma[s, 1]
                h2 = 0.5 * speed * sigma[s, 2]
                fp = _trilinear(f, (c0 + h0 + L) / dv, (c1 + h1 + L) / dv, (c2 + h2 + L) / dv)
                fs = _trilinear(f, (c0 - h0 + L) / dv, (c1 - h1 + L) / dv, (c2 - h2 + L) / dv)
                gain += sw[s] * fp * fs
            rate = w[i] * speed**lam if speed > 0.0 else (w[i] if lam == 0.0 else 0.0)
            acc += rate * (gain - total_sw * fv[j] * fv[i])
        out[j] = acc


def _oracle_exact(grid: VelocityGrid, lam: float, b_norm: float, fn, sigma, sw) -> np.ndarray:
    v = np.stack([np.broadcast_to(c, grid.shape).ravel() for c in grid.velocities], axis=1)
    w = grid.weights.ravel()
    fv = np.asarray(fn(v), dtype=float)
    sw = sw * b_norm
    total_sw = sw.sum()
    out = np.empty(v.shape[0])
    for j in range(v.shape[0]):
        u = v[j] - v
        speed = np.sqrt((u * u).sum(axis=1))
        centre = 0.5 * (v[j] + v)
        half = 0.5 * speed[:, None, None] * sigma[None]
        post = (centre[:, None] + half).reshape(-1, 3)
        post_star = (centre[:, None] - half).reshape(-1, 3)
        gain = (fn(post) * fn(post_star)).reshape(v.shape[0], -1) @ sw
        rate = w * (speed**lam if lam else 1.0)
        out[j] = rate @ (gain - total_sw * fv[j] * fv)
    return out.reshape(grid.shape)


def direct_collision_oracle(grid: VelocityGrid, kernel: KernelSpec, f, angular_nodes: int) -> np.ndarray:
    """Strong-form quadrature of ``Q(f, f)`` on the lattice, for cross-checks.

    Sums over lattice ``v_*`` with the grid weights and over a product rule
    on the sphere with ``angular_nodes`` Gauss points in ``cos(theta)``. No
    cutoff in ``|u|`` is applied.

    ``f`` is either an ``N^3`` array, whose off-lattice post-collision values
    are trilinear interpolants (zero outside the lattice), or a callable
    mapping an ``(n, 3)`` array of velocities to values, which is then
    evaluated exactly at the post-collision velocities.
    """
    if grid.N > ORACLE_MAX_N:
        raise ValueError(f"direct oracle is limited to N <= {ORACLE_MAX_N}, got {grid.N}")
    sigma, sw = sphere_rule(angular_nodes)
    if callable(f):
        return _oracle_exact(grid, kernel.lam, kernel.b_norm, f, sigma, sw)
    f = np.ascontiguousarray(grid._check(f), dtype=float)
    v = np.stack([np.broadcast_to(c, grid.shape).ravel() for c in grid.velocities], axis=1)
    out = np.empty(grid.N**3)
    _oracle_kernel(f, v, grid.weights.ravel(), sigma, sw * kernel.b_norm, kernel.lam,
                   grid.L, grid.dv, out)
    return out.reshape(grid.shape)
