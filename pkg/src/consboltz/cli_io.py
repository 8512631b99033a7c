"""Configuration, run orchestration, CSV output and the command line."""
from __future__ import annotations

import argparse
import csv
import math
import statistics
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .collision import CollisionWorkspace, NonFiniteStateError, collide
from .moments import compute_moments, conserved_moments
from .parallel import (HaloError, SerialTransport, Transport, WorkerTeam, plan_decomposition,
                       run_loopback)
from .scenarios import (SCENARIOS, Scenario, default_velocity_halfwidth, marginal_distribution,
                        relaxation_0d, sudden_wall_scenario)
from .timestepper import LocalDomain, SplittingScheme, collision_rk2, strang_step
from .transport import BOUNDARY_KINDS, NGHOST, CFLViolation, WallStateError
from .velocity_grid import VelocityGrid, build_grid
from .weights import (DEFAULT_NODES, KernelSpec, WeightCacheError, WeightTable, generate_table,
                      load_table, read_header, save_table)


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


# --------------------------------------------------------------------------
# configuration


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else float(text)


def _opt_str(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else text.strip()


@dataclass
class SolverConfig:
    N: int
    scenario: str
    L: float | None = None
    lam: float | None = None
    beta: float = 1.0
    nodes: int = DEFAULT_NODES
    endpoint: str = "periodic"
    epsilon: float = 1.0
    ratio: float | None = None
    T_before: float = 1.0
    length: float = 12.0
    fine_length: float = 1.0
    fine_per_mfp: int = 8
    coarse_per_mfp: int = 2
    mfp: float = 1.0
    far_boundary: str = "zero_gradient"
    wall_normalization: str = "discrete"
    cfl: float = 0.9
    dt: float | None = None
    end_time: float | None = None
    workers: int = 1
    backend: str = "serial"
    processes: int = 1
    weight_cache: str | None = None
    output_dir: str = "output"
    output_interval: float | None = None
    marginal_cells: int = 8
    keep_fields: bool = False

    REQUIRED = ("N", "scenario")

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.N < 4 or self.N % 2:
            raise ConfigError(f"N must be even and >= 4, got {self.N}", "N")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {sorted(SCENARIOS)}",
                              "scenario")
        if self.L is not None and not self.L > 0:
            raise ConfigError("L must be positive", "L")
        if self.lam is not None and not 0 <= self.lam <= 1:
            raise ConfigError("lambda must lie in [0, 1]", "lam")
        if not 0 < self.beta <= 1:
            raise ConfigError("beta must lie in (0, 1]", "beta")
        if self.nodes < 64:
            raise ConfigError("nodes must be >= 64", "nodes")
        if self.endpoint not in ("periodic", "trapezoid"):
            raise ConfigError("endpoint must be 'periodic' or 'trapezoid'", "endpoint")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive", "epsilon")
        if self.ratio is not None and not self.ratio > 0:
            raise ConfigError("ratio must be positive", "ratio")
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]", "cfl")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive", "dt")
        if self.end_time is not None and not self.end_time > 0:
            raise ConfigError("end_time must be positive", "end_time")
        if self.far_boundary not in BOUNDARY_KINDS or self.far_boundary in ("wall", "periodic"):
            raise ConfigError("far_boundary must be 'zero_gradient' or 'extrapolate'", "far_boundary")
        if self.wall_normalization not in ("discrete", "analytic"):
            raise ConfigError("wall_normalization must be 'discrete' or 'analytic'", "wall_normalization")
        if self.workers < 1 or self.processes < 1:
            raise ConfigError("workers and processes must be >= 1", "workers")
        if self.backend not in ("serial", "loopback", "mpi"):
            raise ConfigError("backend must be serial, loopback or mpi", "backend")
        if self.backend == "serial" and self.processes != 1:
            raise ConfigError("the serial backend runs exactly one process", "processes")
        if self.marginal_cells < 0:
            raise ConfigError("marginal_cells must be >= 0", "marginal_cells")

    def echo(self) -> str:
        """Every setting, defaults included, as parseable ``key=value`` lines."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            key = "lambda" if f.name == "lam" else f.name
            lines.append(f"{key}={'auto' if v is None else v}")
        return "\n".join(lines) + "\n"


_CONVERTERS = {
    "N": int, "scenario": str, "L": _opt_float, "lam": _opt_float, "beta": float, "nodes": int,
    "endpoint": str, "epsilon": float, "ratio": _opt_float, "T_before": float, "length": float,
    "fine_length": float, "fine_per_mfp": int, "coarse_per_mfp": int, "mfp": float,
    "far_boundary": str, "wall_normalization": str, "cfl": float, "dt": _opt_float,
    "end_time": _opt_float, "workers": int, "backend": str, "processes": int,
    "weight_cache": _opt_str, "output_dir": str,
    "output_interval": _opt_float, "marginal_cells": int, "keep_fields": _bool,
}


def parse_config(text: str) -> SolverConfig:
    """Parse ``key=value`` lines (``#`` starts a comment)."""
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        name = "lam" if key == "lambda" else key
        if name not in _CONVERTERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[name] = _CONVERTERS[name](val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
        lines[name] = lineno
    missing = [k for k in SolverConfig.REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    try:
        return SolverConfig(**values)
    except ConfigError as exc:
        where = f"line {lines[exc.key]}: " if exc.key in lines else ""
        raise ConfigError(where + str(exc), exc.key) from None


def load_config(path) -> SolverConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def build_scenario(cfg: SolverConfig) -> Scenario:
    if cfg.scenario == "relaxation_0d":
        kw = dict(epsilon=cfg.epsilon, lam=0.0 if cfg.lam is None else cfg.lam)
        if cfg.end_time is not None:
            kw["end_time"] = cfg.end_time
        if cfg.dt is not None:
            kw["dt"] = cfg.dt
        return relaxation_0d(**kw)
    ratio = cfg.ratio if cfg.ratio is not None else (2.0 if cfg.scenario == "sudden_heating" else 0.5)
    kw = dict(T_before=cfg.T_before, length=cfg.length, fine_length=cfg.fine_length,
              fine_per_mfp=cfg.fine_per_mfp, coarse_per_mfp=cfg.coarse_per_mfp, mfp=cfg.mfp,
              lam=1.0 if cfg.lam is None else cfg.lam, epsilon=cfg.epsilon,
              far_boundary=cfg.far_boundary, name=cfg.scenario)
    if cfg.end_time is not None:
        kw["end_time"] = cfg.end_time
    return sudden_wall_scenario(ratio, **kw)


def velocity_grid_for(cfg: SolverConfig, scenario: Scenario) -> VelocityGrid:
    L = cfg.L if cfg.L is not None else default_velocity_halfwidth(scenario.T_max)
    return build_grid(cfg.N, L, cfg.endpoint)


def obtain_table(cfg: SolverConfig, grid: VelocityGrid, kernel: KernelSpec,
                 log=None) -> WeightTable:
    """Load the cached table if present, otherwise generate (and cache) it."""
    path = Path(cfg.weight_cache) if cfg.weight_cache else None
    if path is not None and path.exists():
        return load_table(path, grid, kernel, cfg.nodes)
    t0 = time.perf_counter()
    table = generate_table(grid, kernel, cfg.workers, cfg.nodes)
    if log:
        log(f"generated N={grid.N} weights in {time.perf_counter() - t0:.1f} s")
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_table(table, path)
    return table


# --------------------------------------------------------------------------
# run records


@dataclass
class RunRecord:
    config_echo: str
    x_centers: np.ndarray
    dx: np.ndarray
    v1: np.ndarray
    marginal_cells: np.ndarray
    times: list = field(default_factory=list)
    #: per output time, (n_cells, 4) columns rho, V1, T, H
    moments: list = field(default_factory=list)
    #: per output time, (len(marginal_cells), N)
    marginals: list = field(default_factory=list)
    #: per output time, relative residual of (mass, momentum x3, energy)
    ledger: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    step_seconds: list = field(default_factory=list)
    workers: int = 1
    processes: int = 1
    dt: float = 0.0
    steps: int = 0
    halo_values: int = 0

    def ledger_residual(self) -> np.ndarray:
        return np.array(self.ledger)


def _cell_rows(grid: VelocityGrid, cells: np.ndarray) -> np.ndarray:
    rows = np.empty((cells.shape[0], 4))
    for j, f in enumerate(cells):
        m = compute_moments(grid, f)
        rows[j] = (m.rho, m.velocity[0], m.temperature, m.h_value)
    return rows


def _marginal_indices(centers: np.ndarray, count: int, window=None) -> np.ndarray:
    """``count`` equispaced cells, restricted to ``window`` when given."""
    pool = np.arange(centers.size)
    if window is not None:
        pool = pool[(centers >= window[0]) & (centers <= window[1])]
    if count == 0 or pool.size == 0:
        return np.zeros(0, dtype=int)
    if count >= pool.size:
        return pool
    return pool[np.unique(np.round(np.linspace(0, pool.size - 1, count)).astype(int))]


# --------------------------------------------------------------------------
# drivers


def _run_homogeneous(cfg: SolverConfig, scenario: Scenario, grid: VelocityGrid,
                     table: WeightTable, team: WorkerTeam) -> RunRecord:
    ws = CollisionWorkspace.create(grid, table, team)
    f = scenario.initial_field(grid)
    dt = scenario.dt
    end = scenario.end_time
    n_steps = max(1, math.ceil(end / dt - 1e-9))
    dt = end / n_steps
    every = _output_every(cfg.output_interval, dt, n_steps)
    rec = RunRecord(cfg.echo(), np.zeros(1), np.ones(1), grid.v_nodes.copy(),
                    _marginal_indices(np.zeros(1), cfg.marginal_cells), workers=cfg.workers, dt=dt)
    c0 = conserved_moments(grid, f[0])
    scale = _ledger_scale(c0)

    def record(t, f):
        rec.times.append(t)
        rec.moments.append(_cell_rows(grid, f))
        rec.marginals.append(np.array([marginal_distribution(grid, f[j]) for j in rec.marginal_cells]))
        rec.ledger.append((conserved_moments(grid, f[0]) - c0) / scale)
        if cfg.keep_fields:
            rec.fields.append(f.copy())

    record(0.0, f)
    for n in range(1, n_steps + 1):
        t0 = time.perf_counter()
        f = collision_rk2(ws, f, dt, scenario.epsilon, n)
        rec.step_seconds.append(time.perf_counter() - t0)
        if n % every == 0 or n == n_steps:
            record(n * dt, f)
    rec.steps = n_steps
    return rec


def _output_every(interval, dt, n_steps) -> int:
    if interval is None:
        return max(1, n_steps // 10)
    return max(1, int(round(interval / dt)))


def _ledger_scale(c0: np.ndarray) -> np.ndarray:
    # momentum is measured against the mass-weighted speed scale sqrt(rho * 2 e)
    mass = abs(c0[0]) if c0[0] != 0 else 1.0
    energy = abs(c0[4]) if c0[4] != 0 else 1.0
    mom = math.sqrt(2.0 * mass * energy)
    return np.array([mass, mom, mom, mom, energy])


def _run_spatial(cfg: SolverConfig, scenario: Scenario, grid: VelocityGrid, table: WeightTable,
                 team: WorkerTeam, transport: Transport) -> RunRecord | None:
    spatial = scenario.spatial
    plans = plan_decomposition(spatial.n_cells, transport.size)
    plan = plans[transport.rank]
    centers, widths = spatial.local_geometry(plan.start, plan.stop)
    fe = np.zeros((plan.n_local + 2 * NGHOST,) + grid.shape)
    fe[NGHOST:-NGHOST] = scenario.initial_field(grid, centers[NGHOST:-NGHOST])
    ws = CollisionWorkspace.create(grid, table, team)
    dom = LocalDomain(grid, centers, widths, fe, plan, transport,
                      left_kind=scenario.left_kind, right_kind=scenario.right_kind,
                      wall_left=scenario.wall_left, wall_right=scenario.wall_right, ws=ws,
                      epsilon=scenario.epsilon, wall_normalization=cfg.wall_normalization)
    scheme = SplittingScheme.for_grids(spatial.widths.min(), grid.L, cfg.cfl, cfg.dt)
    n_steps = max(1, math.ceil(scenario.end_time / scheme.dt - 1e-9))
    dt = scenario.end_time / n_steps
    every = _output_every(cfg.output_interval, dt, n_steps)
    marg = _marginal_indices(spatial.centers, cfg.marginal_cells, scenario.marginal_window)
    rec = None
    if transport.rank == 0:
        rec = RunRecord(cfg.echo(), spatial.centers.copy(), spatial.widths.copy(),
                        grid.v_nodes.copy(), marg, workers=cfg.workers,
                        processes=transport.size, dt=dt)
    mine = (marg >= plan.start) & (marg < plan.stop)
    w_local = widths[NGHOST:-NGHOST, None]

    def totals():
        return (w_local * conserved_moments(grid, dom.interior)).sum(axis=0)

    def snapshot():
        rows = _cell_rows(grid, dom.interior)
        margs = [marginal_distribution(grid, dom.interior[j - plan.start]) for j in marg[mine]]
        payload = (rows, margs, totals(), dom.inflow.copy(),
                   dom.interior.copy() if cfg.keep_fields else None)
        return transport.gather(payload)

    def record(t, parts, c0):
        rows = np.concatenate([p[0] for p in parts])
        margs = [m for p in parts for m in p[1]]
        total = np.sum([p[2] for p in parts], axis=0)
        inflow = np.sum([p[3] for p in parts], axis=0)
        rec.times.append(t)
        rec.moments.append(rows)
        rec.marginals.append(np.array(margs).reshape(len(marg), grid.N))
        rec.ledger.append((total - c0 - inflow) / _ledger_scale(c0))
        if cfg.keep_fields:
            rec.fields.append(np.concatenate([p[4] for p in parts]))
        return total

    parts = snapshot()
    c0 = None
    if rec is not None:
        c0 = np.sum([p[2] for p in parts], axis=0)
        record(0.0, parts, c0)
    for n in range(1, n_steps + 1):
        t0 = time.perf_counter()
        strang_step(dom, dt)
        elapsed = time.perf_counter() - t0
        if rec is not None:
            rec.step_seconds.append(elapsed)
        if n % every == 0 or n == n_steps:
            parts = snapshot()
            if rec is not None:
                record(n * dt, parts, c0)
    if rec is not None:
        rec.steps = n_steps
        rec.halo_values = dom.messages
    return rec


def run_solver(cfg: SolverConfig, transport: Transport | None = None,
               table: WeightTable | None = None, log=None) -> RunRecord | None:
    """Run one configuration on this process; rank 0 returns the record."""
    transport = transport or SerialTransport()
    scenario = build_scenario(cfg)
    grid = velocity_grid_for(cfg, scenario)
    kernel = KernelSpec.for_grid(grid, scenario.lam, cfg.beta)
    if table is None:
        table = obtain_table(cfg, grid, kernel, log)
    elif table.grid_id != (grid.N, grid.L) or table.kernel != kernel:
        raise ValueError("supplied weight table does not match the configuration")
    with WorkerTeam(cfg.workers) as team:
        if scenario.homogeneous:
            if transport.size != 1:
                raise ValueError("homogeneous runs use a single process")
            return _run_homogeneous(cfg, scenario, grid, table, team)
        return _run_spatial(cfg, scenario, grid, table, team, transport)


def run_configured(cfg: SolverConfig, log=None) -> RunRecord | None:
    """Dispatch on ``cfg.backend``."""
    if cfg.backend == "serial":
        return run_solver(cfg, log=log)
    if cfg.backend == "loopback":
        scenario = build_scenario(cfg)
        grid = velocity_grid_for(cfg, scenario)
        table = obtain_table(cfg, grid, KernelSpec.for_grid(grid, scenario.lam, cfg.beta), log)
        return run_loopback(cfg.processes, lambda tr: run_solver(cfg, tr, table))[0]
    from .parallel import MPITransport

    tr = MPITransport()
    if tr.rank == 0 and cfg.weight_cache:
        scenario = build_scenario(cfg)
        grid = velocity_grid_for(cfg, scenario)
        obtain_table(cfg, grid, KernelSpec.for_grid(grid, scenario.lam, cfg.beta), log)
    tr.barrier()
    return run_solver(cfg, tr, log=log)


# --------------------------------------------------------------------------
# CSV output

_FMT = "{:.17g}"


def _fmt(x) -> str:
    return _FMT.format(float(x))


def write_moment_csv(record: RunRecord, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x_center", "dx", "rho", "V1", "T", "H"])
            for t, rows in zip(record.times, record.moments):
                for x, dx, r in zip(record.x_centers, record.dx, rows):
                    w.writerow([_fmt(t), _fmt(x), _fmt(dx), *map(_fmt, r)])
    except OSError as exc:
        raise OSError(f"cannot write moment file {path}: {exc}") from exc


def write_marginal_csv(record: RunRecord, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "cell_index", "v1", "g"])
            for t, block in zip(record.times, record.marginals):
                for cell, g in zip(record.marginal_cells, block):
                    for v, gv in zip(record.v1, g):
                        w.writerow([_fmt(t), int(cell), _fmt(v), _fmt(gv)])
    except OSError as exc:
        raise OSError(f"cannot write marginal file {path}: {exc}") from exc


def write_ledger_csv(record: RunRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mass", "momentum1", "momentum2", "momentum3", "energy"])
        for t, r in zip(record.times, record.ledger):
            w.writerow([_fmt(t), *map(_fmt, r)])


def read_csv_columns(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}


# --------------------------------------------------------------------------
# benchmark


@dataclass(frozen=True)
class BenchRow:
    cores: int
    time: float
    ratio: float
    total_speedup: float


def bench_collision(grid: VelocityGrid, table: WeightTable, worker_counts, repetitions: int = 3,
                    f: np.ndarray | None = None) -> list[BenchRow]:
    """Median wall time of one ``collide`` per worker count.

    ``ratio`` compares each row with the previous one and ``total_speedup``
    with the first.
    """
    from .scenarios import maxwellian

    if f is None:
        f = maxwellian(grid, 1.0, (0.2, 0.0, 0.0), 1.0)
    rows: list[BenchRow] = []
    for workers in worker_counts:
        with WorkerTeam(workers) as team:
            ws = CollisionWorkspace.create(grid, table, team)
            collide(ws, f)  # warm-up and JIT
            samples = []
            for _ in range(repetitions):
                t0 = time.perf_counter()
                collide(ws, f)
                samples.append(time.perf_counter() - t0)
        t = statistics.median(samples)
        ratio = rows[-1].time / t if rows else 1.0
        total = rows[0].time / t if rows else 1.0
        rows.append(BenchRow(workers, t, ratio, total))
    return rows


def write_bench_csv(rows, fh) -> None:
    w = csv.writer(fh)
    w.writerow(["cores", "time", "ratio", "total_speedup"])
    for r in rows:
        w.writerow([r.cores, _fmt(r.time), _fmt(r.ratio), _fmt(r.total_speedup)])


# --------------------------------------------------------------------------
# command line

EXIT_CONFIG = 2
EXIT_WEIGHTS = 3
EXIT_NUMERIC = 4
EXIT_PARALLEL = 5
EXIT_IO = 6


def _cmd_solve(args) -> int:
    cfg = load_config(args.config)
    if args.backend:
        cfg.backend = args.backend
    if args.processes:
        cfg.processes = args.processes
    cfg.validate()
    log = (lambda m: print(m, file=sys.stderr))
    rec = run_configured(cfg, log)
    if rec is None:
        return 0
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.echo())
    write_moment_csv(rec, out / "moments.csv")
    write_marginal_csv(rec, out / "marginals.csv")
    write_ledger_csv(rec, out / "ledger.csv")
    worst = np.abs(rec.ledger_residual()).max()
    mean_step = np.mean(rec.step_seconds) if rec.step_seconds else 0.0
    print(f"{rec.steps} steps, dt={rec.dt:.6g}, {mean_step:.4g} s/step, "
          f"max ledger residual {worst:.3e}; output in {out}")
    return 0


def _cmd_gen_weights(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.weight_cache = args.output
    if not cfg.weight_cache:
        raise ConfigError("no weight_cache path in the config and no --output given")
    scenario = build_scenario(cfg)
    grid = velocity_grid_for(cfg, scenario)
    kernel = KernelSpec.for_grid(grid, scenario.lam, cfg.beta)
    path = Path(cfg.weight_cache)
    if path.exists():
        path.unlink()
    obtain_table(cfg, grid, kernel, lambda m: print(m, file=sys.stderr))
    print(f"wrote {path}")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    scenario = build_scenario(cfg)
    grid = velocity_grid_for(cfg, scenario)
    table = obtain_table(cfg, grid, KernelSpec.for_grid(grid, scenario.lam, cfg.beta))
    rows = bench_collision(grid, table, args.workers, args.reps)
    write_bench_csv(rows, sys.stdout)
    return 0


def _cmd_inspect(args) -> int:
    meta = read_header(args.cache)
    for k, v in meta.items():
        print(f"{k}={v}")
    size = Path(args.cache).stat().st_size
    print(f"file_bytes={size}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="consboltz", description="Conservative spectral Boltzmann solver")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run a scenario from a key=value config")
    s.add_argument("config")
    s.add_argument("--backend", choices=["serial", "loopback", "mpi"])
    s.add_argument("--processes", type=int)
    s.set_defaults(fn=_cmd_solve)
    g = sub.add_parser("gen-weights", help="generate and cache the weight table")
    g.add_argument("config")
    g.add_argument("--output")
    g.set_defaults(fn=_cmd_gen_weights)
    b = sub.add_parser("bench", help="time one collision evaluation per worker count")
    b.add_argument("config")
    b.add_argument("--workers", type=int, nargs="+", default=[1])
    b.add_argument("--reps", type=int, default=3)
    b.set_defaults(fn=_cmd_bench)
    i = sub.add_parser("inspect-weights", help="print a weight cache header")
    i.add_argument("cache")
    i.set_defaults(fn=_cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WeightCacheError as exc:
        print(f"weight cache error: {exc}", file=sys.stderr)
        return EXIT_WEIGHTS
    except (NonFiniteStateError, CFLViolation, WallStateError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HaloError as exc:
        print(f"parallel error: {exc}", file=sys.stderr)
        return EXIT_PARALLEL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
