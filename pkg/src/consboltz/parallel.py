"""Two-level parallel execution.

Inside a process a :class:`WorkerTeam` runs statically scheduled parallel maps
over contiguous index ranges (the collision convolution over ``zeta_k``, the
weight table rows, spatial cells). Across processes the spatial cells are
split into contiguous blocks and neighbouring blocks swap two ghost cells per
side before every transport sub-step.
"""
from __future__ import annotations

import os
import queue
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np


def available_cores() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def split_range(total: int, parts: int) -> list[tuple[int, int]]:
    """Contiguous ``[start, stop)`` blocks whose sizes differ by at most one."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    base, extra = divmod(total, parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + base + (1 if i < extra else 0)
        out.append((start, stop))
        start = stop
    return out


class WorkerTeam:
    """A fixed pool of threads executing static-schedule parallel maps.

    The heavy kernels release the GIL (numba ``nogil`` or numpy ufuncs), so
    threads give real parallelism. Every index is owned by exactly one worker
    and results are written to distinct slots, so output does not depend on
    the worker count.
    """

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.workers = int(workers)
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None

    def map_ranges(self, fn: Callable[[int, int], None], total: int) -> None:
        blocks = [b for b in split_range(total, self.workers) if b[1] > b[0]]
        if self._pool is None or len(blocks) <= 1:
            for start, stop in blocks:
                fn(start, stop)
            return
        futures = [self._pool.submit(fn, start, stop) for start, stop in blocks]
        for fut in futures:
            fut.result()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# --------------------------------------------------------------------------
# domain decomposition


@dataclass(frozen=True)
class DecompositionPlan:
    size: int
    rank: int
    start: int  # first global cell owned
    stop: int  # one past the last global cell owned
    total: int
    left: int | None
    right: int | None

    @property
    def n_local(self) -> int:
        return self.stop - self.start


def plan_decomposition(total_cells: int, n_procs: int) -> list[DecompositionPlan]:
    if n_procs < 1:
        raise ValueError("need at least one process")
    if total_cells < n_procs:
        raise ValueError(f"{n_procs} processes for {total_cells} cells: each rank needs a cell")
    plans = []
    for rank, (start, stop) in enumerate(split_range(total_cells, n_procs)):
        plans.append(DecompositionPlan(
            size=n_procs, rank=rank, start=start, stop=stop, total=total_cells,
            left=rank - 1 if rank > 0 else None,
            right=rank + 1 if rank < n_procs - 1 else None,
        ))
    return plans


def predict_speedup(n: float, p: float, N: float, M: float, t_mem: float, t_flop: float,
                    work_const: float) -> float:
    """Leading-order serial/parallel time ratio for ``n`` processes of ``p`` cores."""
    work = work_const * M * N**6 * t_flop
    # same as work / (4 n N^3 t_mem + work / (n p)), written so both limits are exact
    return n * p / (1.0 + 4.0 * n * n * p * N**3 * t_mem / work)


# --------------------------------------------------------------------------
# halo exchange


class HaloError(RuntimeError):
    pass


class HaloTimeout(HaloError):
    pass


@dataclass(frozen=True)
class HaloOp:
    kind: str  # "send" or "recv"
    side: str  # neighbour addressed: "left" or "right"
    slot: str  # local cell: "last", "second_last", "first", "second", or a ghost name
    tag: int


# ghost/interior slots in terms of n_local; see transport.NGHOST
_SLOT_INDEX = {
    "ghost_left_far": lambda n: 0,
    "ghost_left_near": lambda n: 1,
    "first": lambda n: 2,
    "second": lambda n: 3,
    "second_last": lambda n: n,
    "last": lambda n: n + 1,
    "ghost_right_near": lambda n: n + 2,
    "ghost_right_far": lambda n: n + 3,
}

_EVEN_SCHEDULE = (
    HaloOp("send", "right", "last", 0),
    HaloOp("recv", "left", "ghost_left_near", 0),
    HaloOp("send", "right", "second_last", 0),
    HaloOp("recv", "left", "ghost_left_far", 0),
    HaloOp("send", "left", "first", 1),
    HaloOp("recv", "right", "ghost_right_near", 1),
    HaloOp("send", "left", "second", 1),
    HaloOp("recv", "right", "ghost_right_far", 1),
)

_ODD_SCHEDULE = (
    HaloOp("recv", "left", "ghost_left_near", 0),
    HaloOp("send", "right", "last", 0),
    HaloOp("recv", "left", "ghost_left_far", 0),
    HaloOp("send", "right", "second_last", 0),
    HaloOp("recv", "right", "ghost_right_near", 1),
    HaloOp("send", "left", "first", 1),
    HaloOp("recv", "right", "ghost_right_far", 1),
    HaloOp("send", "left", "second", 1),
)


def halo_schedule(rank: int) -> tuple[HaloOp, ...]:
    """The eight-phase interleaved schedule for ``rank``.

    Even ranks start by sending right while odd ranks start by receiving
    from the left, so every synchronous send meets a posted receive.
    """
    return _EVEN_SCHEDULE if rank % 2 == 0 else _ODD_SCHEDULE


def halo_exchange(plan: DecompositionPlan, fe: np.ndarray, transport: "Transport") -> int:
    """Swap two ghost cells per side with the neighbouring ranks, in place.

    Ghosts at physical boundaries are left untouched. Returns the number of
    values received.
    """
    n = plan.n_local
    if fe.shape[0] != n + 4:
        raise HaloError(f"rank {plan.rank}: field has {fe.shape[0]} cells, expected {n + 4}")
    received = 0
    for phase, op in enumerate(halo_schedule(plan.rank)):
        peer = plan.left if op.side == "left" else plan.right
        if peer is None:
            continue
        idx = _SLOT_INDEX[op.slot](n)
        if op.kind == "send":
            transport.send(fe[idx], peer, op.tag)
        else:
            buf = transport.recv(peer, op.tag, phase)
            if buf.size != fe[idx].size:
                raise HaloError(f"rank {plan.rank} phase {phase}: payload of {buf.size} values "
                                f"from rank {peer}, expected {fe[idx].size}")
            fe[idx] = buf.reshape(fe[idx].shape)
            received += buf.size
    return received


# --------------------------------------------------------------------------
# message transports


class Transport:
    """Rank-addressed point-to-point messaging with synchronous sends."""

    rank: int = 0
    size: int = 1

    def send(self, data: np.ndarray, dest: int, tag: int) -> None:
        raise NotImplementedError

    def recv(self, source: int, tag: int, phase: int = -1) -> np.ndarray:
        raise NotImplementedError

    def gather(self, obj):
        """Collect ``obj`` from every rank on rank 0 (``None`` elsewhere)."""
        raise NotImplementedError

    def allreduce_max(self, value: float) -> float:
        raise NotImplementedError

    def barrier(self) -> None:
        pass


class SerialTransport(Transport):
    def send(self, data, dest, tag):
        raise HaloError("single-process transport has no peers")

    def recv(self, source, tag, phase=-1):
        raise HaloError("single-process transport has no peers")

    def gather(self, obj):
        return [obj]

    def allreduce_max(self, value):
        return value


class _Mailbox:
    def __init__(self):
        self.items: queue.Queue = queue.Queue()


class LoopbackHub:
    """Shared rendezvous state for :class:`LoopbackTransport` endpoints."""

    def __init__(self, size: int, timeout: float = 60.0):
        self.size = size
        self.timeout = timeout
        self._boxes: dict[tuple[int, int, int], _Mailbox] = {}
        self._lock = threading.Lock()
        self._barrier = threading.Barrier(size)

    def box(self, src: int, dst: int, tag: int) -> _Mailbox:
        with self._lock:
            return self._boxes.setdefault((src, dst, tag), _Mailbox())

    def endpoint(self, rank: int) -> "LoopbackTransport":
        return LoopbackTransport(self, rank)


class LoopbackTransport(Transport):
    """In-process backend: one thread per rank, synchronous send semantics.

    ``send`` returns only after the matching ``recv`` has taken the payload,
    which reproduces the blocking behaviour of an unbuffered synchronous send
    and so exposes schedules that would deadlock on a real cluster.
    """

    _GATHER_TAG = 1 << 20
    _REDUCE_TAG = (1 << 20) + 1

    def __init__(self, hub: LoopbackHub, rank: int):
        self.hub = hub
        self.rank = rank
        self.size = hub.size

    def send(self, data, dest, tag):
        if not 0 <= dest < self.size:
            raise HaloError(f"rank {self.rank}: no rank {dest}")
        taken = threading.Event()
        self.hub.box(self.rank, dest, tag).items.put((np.array(data, copy=True), taken))
        if not taken.wait(self.hub.timeout):
            raise HaloTimeout(f"rank {self.rank}: send to rank {dest} (tag {tag}) was never received")

    def recv(self, source, tag, phase=-1):
        try:
            data, taken = self.hub.box(source, self.rank, tag).items.get(timeout=self.hub.timeout)
        except queue.Empty:
            raise HaloTimeout(f"rank {self.rank} phase {phase}: no message from rank {source} "
                              f"(tag {tag})") from None
        taken.set()
        return data

    def _send_obj(self, obj, dest, tag):
        taken = threading.Event()
        self.hub.box(self.rank, dest, tag).items.put((obj, taken))
        if not taken.wait(self.hub.timeout):
            raise HaloTimeout(f"rank {self.rank}: collective message to {dest} not received")

    def gather(self, obj):
        if self.rank != 0:
            self._send_obj(obj, 0, self._GATHER_TAG)
            return None
        out = [obj]
        for src in range(1, self.size):
            out.append(self.recv(src, self._GATHER_TAG))
        return out

    def allreduce_max(self, value):
        values = self.gather(value)
        if self.rank == 0:
            result = max(values)
            for dst in range(1, self.size):
                self._send_obj(result, dst, self._REDUCE_TAG)
            return result
        return self.recv(0, self._REDUCE_TAG)

    def barrier(self):
        self.hub._barrier.wait(self.hub.timeout)


class MPITransport(Transport):
    """Backend over ``mpi4py``; rank and size come from the launcher."""

    def __init__(self, comm=None):
        from mpi4py import MPI

        self.comm = comm if comm is not None else MPI.COMM_WORLD
        self.rank = self.comm.Get_rank()
        self.size = self.comm.Get_size()

    def send(self, data, dest, tag):
        self.comm.Ssend(np.ascontiguousarray(data, dtype=np.float64), dest=dest, tag=tag)

    def recv(self, source, tag, phase=-1):
        from mpi4py import MPI

        status = MPI.Status()
        self.comm.Probe(source=source, tag=tag, status=status)
        buf = np.empty(status.Get_count(MPI.DOUBLE), dtype=np.float64)
        self.comm.Recv(buf, source=source, tag=tag)
        return buf

    def gather(self, obj):
        return self.comm.gather(obj, root=0)

    def allreduce_max(self, value):
        from mpi4py import MPI

        return self.comm.allreduce(value, op=MPI.MAX)

    def barrier(self):
        self.comm.Barrier()


def run_loopback(n_ranks: int, fn: Callable[[Transport], object], timeout: float = 600.0) -> list:
    """Run ``fn(transport)`` on ``n_ranks`` threads joined by a loopback hub.

    Returns the per-rank results; the first exception raised by any rank is
    re-raised.
    """
    hub = LoopbackHub(n_ranks, timeout)
    results: list = [None] * n_ranks
    errors: list = [None] * n_ranks

    def target(rank):
        try:
            results[rank] = fn(hub.endpoint(rank))
        except BaseException as exc:  # surfaced below
            errors[rank] = exc

    threads = [threading.Thread(target=target, args=(r,), name=f"rank-{r}") for r in range(n_ranks)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for exc in errors:
        if exc is not None:
            raise exc
    return results
