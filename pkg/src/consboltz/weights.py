"""Convolution weights ``Ghat(xi, zeta)`` for isotropic scattering in 3-D.

For ``b = 1/(4 pi)`` the weight reduces to a radial integral

    Ghat = 4 pi / (2 pi)^(3/2) * int_0^r0 r^(lam+2) [sinc(a r) sinc(b r) - sinc(c r)] dr

with ``a = beta |zeta| / 2``, ``b = |xi - beta zeta / 2|`` and ``c = |xi|``.
Hard spheres (``lam = 1``) and Maxwell molecules (``lam = 0``) have closed
forms; everything else goes through composite Gauss quadrature.

Tables are stored zeta-major: ``values[k, m]`` with ``k`` the flattened
Fourier index of ``zeta`` and ``m`` that of ``xi``, so the convolution for one
``zeta_k`` streams a contiguous row.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .velocity_grid import VelocityGrid

PREFACTOR = 4.0 * np.pi / (2.0 * np.pi) ** 1.5

#: Gauss order of each quadrature panel
PANEL_ORDER = 16
#: production node count; validated by the self-convergence tests
DEFAULT_NODES = 512

_SERIES_TERMS = 14
_SERIES_CUTOFF = 0.5
_CHUNK = 1 << 18


@dataclass(frozen=True)
class KernelSpec:
    """Collision kernel ``|u|^lam b(cos theta)`` with isotropic ``b``."""

    lam: float
    r0: float
    beta: float = 1.0
    b_norm: float = field(default=1.0 / (4.0 * np.pi), init=False)

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def for_grid(cls, grid: VelocityGrid, lam: float, beta: float = 1.0) -> "KernelSpec":
        return cls(lam=lam, r0=grid.L, beta=beta)

    @property
    def has_closed_form(self) -> bool:
        return self.lam in (0.0, 1.0)


# --------------------------------------------------------------------------
# radial integrals


def _series(x, r0, lead, shift, factorial_offset):
    # sum_n (-1)^n x^(2n) r0^(2n+lead) / ((2n+offset)! (2n+shift))
    out = np.zeros_like(x)
    x2 = (x * r0) ** 2
    term = np.ones_like(x)
    for n in range(_SERIES_TERMS):
        if n:
            term = term * (-x2)
        out = out + term / (math.factorial(2 * n + factorial_offset) * (2 * n + shift))
    return out * r0**lead


def _cos_moment(lam: int, p: np.ndarray, r0: float) -> np.ndarray:
    """``int_0^r0 r^lam cos(p r) dr`` for ``lam`` in {0, 1}."""
    p = np.abs(p)
    x = p * r0
    small = x < _SERIES_CUTOFF
    ps = np.where(small, 1.0, p)
    xs = ps * r0
    if lam == 0:
        exact = np.sin(xs) / ps
    else:
        exact = (xs * np.sin(xs) + np.cos(xs) - 1.0) / ps**2
    return np.where(small, _series(p, r0, lam + 1, lam + 1, 0), exact)


def _sinc_moment(lam: int, c: np.ndarray, r0: float) -> np.ndarray:
    """``int_0^r0 r^(lam+2) sinc(c r) dr`` for ``lam`` in {0, 1}."""
    x = c * r0
    small = x < _SERIES_CUTOFF
    cs = np.where(small, 1.0, c)
    xs = cs * r0
    if lam == 0:
        exact = (np.sin(xs) - xs * np.cos(xs)) / cs**3
    else:
        exact = ((2.0 - xs**2) * np.cos(xs) + 2.0 * xs * np.sin(xs) - 2.0) / cs**4
    return np.where(small, _series(c, r0, lam + 3, lam + 3, 1), exact)


def closed_form_abc(lam: float, r0: float, a, b, c) -> np.ndarray:
    """Closed-form weight from the three radial frequencies.

    The sinc product is rewritten as ``[cos(p r) - cos(q r)] / (2 a b r^2)``
    with ``p = a - b`` and ``q = a + b``.
    """
    if lam not in (0.0, 1.0):
        raise ValueError(f"closed forms exist only for lambda in {{0, 1}}, got {lam}")
    n = int(lam)
    a, b, c = (np.asarray(t, dtype=float) for t in (a, b, c))
    a, b, c = np.broadcast_arrays(a, b, c)
    ab = a * b
    both = ab > 0
    safe_ab = np.where(both, ab, 1.0)
    gain_ab = (_cos_moment(n, a - b, r0) - _cos_moment(n, a + b, r0)) / (2.0 * safe_ab)
    # one of a, b vanishes: the other sinc survives alone
    gain_one = _sinc_moment(n, a + b, r0)
    gain = np.where(both, gain_ab, gain_one)
    out = PREFACTOR * (gain - _sinc_moment(n, c, r0))
    # zeta = 0 cancels identically
    return np.where(a == 0.0, 0.0, out)


def _panel_rule(lam: float, r0: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int_0^r0 r^lam g(r) dr`` with smooth ``g``.

    The first panel uses Gauss-Jacobi so the ``r^lam`` endpoint behaviour is
    integrated exactly; the rest are Gauss-Legendre.
    """
    if nodes < 4 * PANEL_ORDER or nodes % PANEL_ORDER:
        raise ValueError(f"nodes must be a multiple of {PANEL_ORDER} and >= {4 * PANEL_ORDER}")
    panels = nodes // PANEL_ORDER
    h = r0 / panels
    xj, wj = roots_jacobi(PANEL_ORDER, 0.0, lam)
    r_first = 0.5 * h * (xj + 1.0)
    w_first = wj * (0.5 * h) ** (lam + 1.0)
    xl, wl = roots_legendre(PANEL_ORDER)
    left = h * np.arange(1, panels)[:, None]
    r_rest = (left + 0.5 * h * (xl + 1.0)).ravel()
    w_rest = np.tile(0.5 * h * wl, panels - 1) * r_rest**lam
    return np.concatenate([r_first, r_rest]), np.concatenate([w_first, w_rest])


def quadrature_abc(lam: float, r0: float, a, b, c, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Weight from the three radial frequencies by composite Gauss quadrature."""
    r, w = _panel_rule(lam, r0, nodes)
    a, b, c = (np.asarray(t, dtype=float) for t in (a, b, c))
    shape = np.broadcast_shapes(a.shape, b.shape, c.shape)
    a, b, c = (np.broadcast_to(t, shape).reshape(-1, 1) for t in (a, b, c))
    out = np.empty(a.shape[0])
    r2w = w * r**2
    step = max(1, _CHUNK // r.size)
    for s in range(0, out.size, step):
        sl = slice(s, s + step)
        # np.sinc is sin(pi x)/(pi x)
        integrand = np.sinc(a[sl] * r / np.pi) * np.sinc(b[sl] * r / np.pi) - np.sinc(c[sl] * r / np.pi)
        out[sl] = (integrand * r2w).sum(axis=1)
    return (PREFACTOR * out).reshape(shape)


def _frequencies(kernel: KernelSpec, xi, zeta):
    xi = np.asarray(xi, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    a = 0.5 * kernel.beta * np.linalg.norm(zeta, axis=-1)
    b = np.linalg.norm(xi - 0.5 * kernel.beta * zeta, axis=-1)
    c = np.linalg.norm(xi, axis=-1)
    return a, b, c


def weight_quadrature(kernel: KernelSpec, xi, zeta, nodes: int = DEFAULT_NODES) -> float:
    a, b, c = _frequencies(kernel, xi, zeta)
    return float(quadrature_abc(kernel.lam, kernel.r0, a, b, c, nodes))


def weight_closed_form(kernel: KernelSpec, xi, zeta) -> float:
    a, b, c = _frequencies(kernel, xi, zeta)
    return float(closed_form_abc(kernel.lam, kernel.r0, a, b, c))


# --------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class WeightTable:
    N: int
    L: float
    kernel: KernelSpec
    values: np.ndarray  # (N^3 zeta, N^3 xi), zeta-major
    method: str  # "closed" or "gauss"
    nodes: int  # 0 for closed forms

    @property
    def grid_id(self) -> tuple[int, float]:
        return (self.N, self.L)

    def as6d(self) -> np.ndarray:
        return self.values.reshape((self.N,) * 6)


def table_nbytes(N: int) -> int:
    return 8 * N**6


def _lattice_keys(N: int, k_flat: np.ndarray):
    """Integer |zeta|^2, |xi|^2 and xi.zeta (lattice units) for rows ``k_flat``."""
    h = N // 2
    idx = np.arange(N) - h
    k1, k2, k3 = np.unravel_index(k_flat, (N, N, N))
    kk = np.stack([idx[k1], idx[k2], idx[k3]], axis=-1).astype(np.int64)
    m1, m2, m3 = np.meshgrid(idx, idx, idx, indexing="ij")
    mm = np.stack([m1.ravel(), m2.ravel(), m3.ravel()], axis=-1).astype(np.int64)
    K2 = (kk**2).sum(axis=1)[:, None]
    M2 = (mm**2).sum(axis=1)[None, :]
    D = kk @ mm.T
    return K2, M2, D


def _fill_rows(grid: VelocityGrid, kernel: KernelSpec, rows: np.ndarray, out: np.ndarray,
               nodes: int) -> None:
    dz = grid.dzeta
    beta = kernel.beta
    step = max(1, _CHUNK // grid.N**3)
    for s in range(0, rows.size, step):
        r = rows[s:s + step]
        K2, M2, D = _lattice_keys(grid.N, r)
        if kernel.has_closed_form:
            a = 0.5 * beta * dz * np.sqrt(K2.astype(float))
            b = dz * np.sqrt(np.maximum(M2 - beta * D + 0.25 * beta**2 * K2, 0.0))
            c = dz * np.sqrt(M2.astype(float))
            out[s:s + step] = closed_form_abc(kernel.lam, kernel.r0, a, b, c)
            continue
        keys = np.stack(np.broadcast_arrays(K2, M2, D), axis=-1).reshape(-1, 3)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        K2u, M2u, Du = (uniq[:, i].astype(float) for i in range(3))
        a = 0.5 * beta * dz * np.sqrt(K2u)
        b = dz * np.sqrt(np.maximum(M2u - beta * Du + 0.25 * beta**2 * K2u, 0.0))
        c = dz * np.sqrt(M2u)
        vals = quadrature_abc(kernel.lam, kernel.r0, a, b, c, nodes)
        vals[a == 0.0] = 0.0
        out[s:s + step] = vals[inverse.ravel()].reshape(r.size, -1)


def generate_table(grid: VelocityGrid, kernel: KernelSpec, workers: int = 1,
                   nodes: int = DEFAULT_NODES) -> WeightTable:
    """Fill all ``N^6`` weights, splitting the zeta rows evenly over ``workers``."""
    from .parallel import WorkerTeam

    M = grid.N**3
    nbytes = table_nbytes(grid.N)
    try:
        values = np.empty((M, M))
    except MemoryError as exc:
        raise MemoryError(
            f"weight table for N={grid.N} needs {nbytes} bytes ({nbytes / 2**30:.2f} GiB)"
        ) from exc
    method = "closed" if kernel.has_closed_form else "gauss"
    used_nodes = 0 if kernel.has_closed_form else nodes

    def work(start: int, stop: int) -> None:
        _fill_rows(grid, kernel, np.arange(start, stop), values[start:stop], nodes)

    with WorkerTeam(workers) as team:
        team.map_ranges(work, M)
    values.flags.writeable = False
    return WeightTable(grid.N, grid.L, kernel, values, method, used_nodes)


# --------------------------------------------------------------------------
# cache file


class WeightCacheError(Exception):
    """Base class for weight cache failures."""


class CorruptHeaderError(WeightCacheError):
    pass


class TruncatedPayloadError(WeightCacheError):
    pass


class ParameterMismatchError(WeightCacheError):
    pass


MAGIC = b"CBWT"
VERSION = 1
_METHODS = {"closed": 0, "gauss": 1}
# magic, version, N, L, lambda, beta, r0, method, nodes
_HEADER = struct.Struct("<4sIIddddII")


def save_table(table: WeightTable, path) -> None:
    path = Path(path)
    header = _HEADER.pack(MAGIC, VERSION, table.N, table.L, table.kernel.lam,
                          table.kernel.beta, table.kernel.r0, _METHODS[table.method],
                          table.nodes)
    tmp = path.with_suffix(path.suffix + ".part")
    with open(tmp, "wb") as fh:
        fh.write(header)
        np.ascontiguousarray(table.values, dtype="<f8").tofile(fh)
    tmp.replace(path)


def read_header(path) -> dict:
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise CorruptHeaderError(f"{path}: header is {len(raw)} bytes, expected {_HEADER.size}")
    magic, version, N, L, lam, beta, r0, method, nodes = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise CorruptHeaderError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CorruptHeaderError(f"{path}: unsupported version {version}")
    names = {v: k for k, v in _METHODS.items()}
    if method not in names or N < 4 or N % 2:
        raise CorruptHeaderError(f"{path}: invalid header fields (N={N}, method={method})")
    return dict(N=N, L=L, lam=lam, beta=beta, r0=r0, method=names[method], nodes=nodes)


def load_table(path, grid: VelocityGrid, kernel: KernelSpec,
               nodes: int | None = None) -> WeightTable:
    """Read a cached table, refusing any mismatch with the expected parameters."""
    path = Path(path)
    meta = read_header(path)
    expected = dict(N=grid.N, L=grid.L, lam=kernel.lam, beta=kernel.beta, r0=kernel.r0)
    if not kernel.has_closed_form:
        expected["nodes"] = DEFAULT_NODES if nodes is None else nodes
    for key, want in expected.items():
        if meta[key] != want:
            raise ParameterMismatchError(f"{path}: {key} is {meta[key]} in file, expected {want}")
    M = meta["N"] ** 3
    count = M * M
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        values = np.fromfile(fh, dtype="<f8", count=count)
        extra = fh.read(1)
    if values.size != count:
        raise TruncatedPayloadError(f"{path}: payload has {values.size} of {count} values")
    if extra:
        raise CorruptHeaderError(f"{path}: trailing bytes after payload")
    values = values.astype(np.float64, copy=False).reshape(M, M)
    values.flags.writeable = False
    return WeightTable(grid.N, grid.L, kernel, values, meta["method"], meta["nodes"])
