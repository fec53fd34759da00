"""Continuous-time cyclic particle system on a ring.

Two engines evolve the same process: ``Vertex`` updates site colors, ``Edge``
updates the embedded edge particles directly (kappa in {3, 4} only). Two
schedulers drive them:

``Naive``
    All 2N directed clocks are superposed: exponential(2N) waiting times and a
    uniformly chosen clock per event. Firings that change nothing are logged
    as NoOp. Every clock firing is visible in the log, which is what virtual
    particle replays need.
``RejectionFree``
    Only clocks that would change the state are kept, in an indexed set with
    O(1) insert, remove and uniform sampling. Waiting times are
    exponential(k) with k the set size. For kappa >= 3 the set is exactly the
    directed particles (an R listens to its ``+`` clock, an L to its ``-``).

Both consume two draws per event (waiting time, then clock choice). The
pending event time is carried across snapshot boundaries, so a trajectory
does not depend on where it is sampled.

Randomness for a config with seed ``s``: the initial coloring (when drawn by
:func:`initial_coloring`) uses ``RngStream(s).spawn(0)``, the clocks use
``RngStream(s).spawn(1)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from numba import njit

from ..lattice import Coloring, EdgeConfig, EMBED_KAPPAS, embed, new_uniform_coloring, reconstruct
from ..rng import RngStream, draw_exp, draw_u01
from .rules import Direction, EventKind, EventRecord


class Engine(str, enum.Enum):
    VERTEX = "Vertex"
    EDGE = "Edge"


class Scheduler(str, enum.Enum):
    NAIVE = "Naive"
    REJECTION_FREE = "RejectionFree"


class EngineError(RuntimeError):
    pass


@dataclass
class SimConfig:
    kappa: int
    n_sites: int
    seed: int
    t_max: float
    snapshot_times: Sequence[float] = ()
    engine: Engine = Engine.EDGE
    scheduler: Scheduler = Scheduler.REJECTION_FREE
    log_events: bool = False

    def __post_init__(self):
        self.engine = Engine(self.engine)
        self.scheduler = Scheduler(self.scheduler)
        self.snapshot_times = tuple(float(t) for t in self.snapshot_times)
        if self.n_sites < 2:
            raise ValueError("n_sites must be >= 2")
        if self.kappa < 2:
            raise ValueError("kappa must be >= 2")
        if self.t_max < 0:
            raise ValueError("t_max must be non-negative")
        if list(self.snapshot_times) != sorted(self.snapshot_times):
            raise ValueError("snapshot_times must be sorted")
        for t in self.snapshot_times:
            if not 0 <= t <= self.t_max:
                raise ValueError(f"snapshot time {t} outside [0, {self.t_max}]")
        if self.engine is Engine.EDGE and self.kappa not in EMBED_KAPPAS:
            raise ValueError("the Edge engine needs kappa in {3, 4}; use the Vertex engine")


@dataclass
class EventLog:
    """Columnar event log covering the time window ``[t_start, t_end]``."""

    time: np.ndarray
    edge: np.ndarray
    direction: np.ndarray
    kind: np.ndarray
    t_start: float = 0.0
    t_end: float = 0.0
    n_sites: int = 0
    kappa: int = 0
    # True when every clock firing is recorded (Naive scheduler)
    all_clocks: bool = False

    def __len__(self):
        return int(self.time.size)

    def __getitem__(self, i) -> EventRecord:
        return EventRecord(float(self.time[i]), int(self.edge[i]),
                           Direction(int(self.direction[i])), EventKind(int(self.kind[i])))

    def __iter__(self) -> Iterator[EventRecord]:
        for i in range(len(self)):
            yield self[i]

    def kind_counts(self, t0: float | None = None, t1: float | None = None) -> dict[EventKind, int]:
        """Event counts by kind for times in ``(t0, t1]``."""
        mask = np.ones(len(self), dtype=bool)
        if t0 is not None:
            mask &= self.time > t0
        if t1 is not None:
            mask &= self.time <= t1
        k = self.kind[mask]
        return {kind: int(np.count_nonzero(k == kind)) for kind in EventKind}

    def window(self, t0: float, t1: float) -> "EventLog":
        if t0 < self.t_start or t1 > self.t_end or t1 < t0:
            raise ValueError(f"window [{t0}, {t1}] not covered by log [{self.t_start}, {self.t_end}]")
        m = (self.time > t0) & (self.time <= t1)
        return EventLog(self.time[m], self.edge[m], self.direction[m], self.kind[m],
                        t0, t1, self.n_sites, self.kappa, self.all_clocks)

    @classmethod
    def from_records(cls, records, t_start=0.0, t_end=None, n_sites=0, kappa=0,
                     all_clocks=False) -> "EventLog":
        records = list(records)
        time = np.array([r.time for r in records], dtype=np.float64)
        if t_end is None:
            t_end = float(time[-1]) if records else t_start
        return cls(time,
                   np.array([r.edge for r in records], dtype=np.int32),
                   np.array([int(Direction.parse(r.direction)) for r in records], dtype=np.int8),
                   np.array([int(r.kind) for r in records], dtype=np.int8),
                   float(t_start), float(t_end), n_sites, kappa, all_clocks)


@dataclass
class Snapshot:
    time: float
    coloring: Coloring
    edges: EdgeConfig | None


@dataclass
class Trajectory:
    snapshots: list[Snapshot]
    events: EventLog | None
    final_time: float
    # cumulative counts by EventKind at each snapshot
    kind_counts: list[np.ndarray] = field(default_factory=list)
    final: Snapshot | None = None


# --------------------------------------------------------------------- kernel

_NAIVE, _RF = 0, 1
_VERTEX, _EDGE = 0, 1
_OK, _LOG_FULL, _TIE = 0, 1, 2


@njit(cache=True, inline="always")
def _classify(direction, ahead, kappa):
    if kappa != 3 and kappa != 4:
        return 0
    if ahead == 0:
        return 0
    if direction == 0:
        same, opposite = kappa - 1, 1
    else:
        same, opposite = 1, kappa - 1
    if ahead == opposite:
        return 1
    if ahead == same:
        return 2 if kappa == 3 else 3
    return 4


@njit(cache=True, inline="always")
def _is_active(engine, kappa, colors, edges, cid):
    n = colors.shape[0] if engine == _VERTEX else edges.shape[0]
    e = cid >> 1
    d = cid & 1
    if engine == _VERTEX:
        if d == 0:
            src, tgt = e, (e + 1) % n
        else:
            src, tgt = (e + 1) % n, e
        return colors[tgt] == (colors[src] + kappa - 1) % kappa
    r = edges[e]
    if d == 0:
        return r == kappa - 1
    return r == 1


@njit(cache=True, inline="always")
def _set_insert(pos, where, meta, cid):
    if where[cid] < 0:
        k = meta[0]
        pos[k] = cid
        where[cid] = k
        meta[0] = k + 1


@njit(cache=True, inline="always")
def _set_remove(pos, where, meta, cid):
    k = where[cid]
    if k >= 0:
        last = meta[0] - 1
        moved = pos[last]
        pos[k] = moved
        where[moved] = k
        where[cid] = -1
        meta[0] = last


@njit(cache=True)
def _build_active(engine, kappa, colors, edges, pos, where, meta):
    n2 = where.shape[0]
    meta[0] = 0
    for cid in range(n2):
        where[cid] = -1
    for cid in range(n2):
        if _is_active(engine, kappa, colors, edges, cid):
            _set_insert(pos, where, meta, cid)


@njit(cache=True, nogil=True)
def _advance(engine, scheduler, kappa, colors, edges, pos, where, meta, clock, ctr, key,
             t_stop, counts, log_t, log_e, log_d, log_k, log_on):
    """Run events with time <= t_stop.

    meta = [n_active, n_log, base_color]; clock = [t, pending_t] with
    pending_t < 0 meaning no pending event; ctr = [draw counter].
    """
    n = colors.shape[0] if engine == _VERTEX else edges.shape[0]
    n2 = 2 * n
    cap = log_t.shape[0]
    while True:
        if clock[1] < 0.0:
            rate = n2 if scheduler == _NAIVE else meta[0]
            if rate == 0:
                clock[0] = t_stop
                return _OK
            w = draw_exp(key, ctr[0], float(rate))
            ctr[0] += np.uint64(1)
            nt = clock[0] + w
            if not nt > clock[0]:
                return _TIE
            clock[1] = nt
        if clock[1] > t_stop:
            clock[0] = t_stop
            return _OK
        if log_on and meta[1] >= cap:
            return _LOG_FULL
        t = clock[1]
        u = draw_u01(key, ctr[0])
        ctr[0] += np.uint64(1)
        if scheduler == _NAIVE:
            cid = int(u * n2)
            if cid >= n2:
                cid = n2 - 1
        else:
            k = int(u * meta[0])
            if k >= meta[0]:
                k = meta[0] - 1
            cid = pos[k]
        e = cid >> 1
        d = cid & 1
        if d == 0:
            src, tgt, ahead = e, (e + 1) % n, (e + 1) % n
        else:
            src, tgt, ahead = (e + 1) % n, e, (e - 1 + n) % n
        kind = 5
        if engine == _VERTEX:
            if colors[tgt] == (colors[src] + kappa - 1) % kappa:
                if d == 0:
                    a_res = (colors[(ahead + 1) % n] - colors[ahead] + kappa) % kappa
                else:
                    a_res = (colors[e] - colors[ahead] + kappa) % kappa
                kind = _classify(d, a_res, kappa)
                colors[tgt] = colors[src]
        else:
            r = edges[e]
            if (d == 0 and r == kappa - 1) or (d == 1 and r == 1):
                kind = _classify(d, edges[ahead], kappa)
                edges[e] = 0
                if d == 0:
                    edges[ahead] = (edges[ahead] + kappa - 1) % kappa
                else:
                    edges[ahead] = (edges[ahead] + 1) % kappa
                if tgt == 0:
                    meta[2] = (meta[2] + 1) % kappa
        if kind != 5 and scheduler == _RF:
            left = (tgt - 1 + n) % n
            for c in (2 * left, 2 * left + 1, 2 * tgt, 2 * tgt + 1):
                if _is_active(engine, kappa, colors, edges, c):
                    _set_insert(pos, where, meta, c)
                else:
                    _set_remove(pos, where, meta, c)
        counts[kind] += 1
        if log_on:
            i = meta[1]
            log_t[i] = t
            log_e[i] = e
            log_d[i] = d
            log_k[i] = kind
            meta[1] = i + 1
        clock[0] = t
        clock[1] = -1.0


class _Runner:
    """Mutable kernel state for one realization."""

    def __init__(self, cfg: SimConfig, x0: Coloring):
        self.cfg = cfg
        self.kappa = cfg.kappa
        self.n = x0.n
        self.engine = _VERTEX if cfg.engine is Engine.VERTEX else _EDGE
        self.scheduler = _NAIVE if cfg.scheduler is Scheduler.NAIVE else _RF
        if self.engine == _VERTEX:
            self.colors = x0.sites.astype(np.int32)
            self.edges = np.zeros(1, dtype=np.int8)
        else:
            self.colors = np.zeros(1, dtype=np.int32)
            self.edges = embed(x0).residues.copy()
        self.pos = np.zeros(2 * self.n, dtype=np.int64)
        self.where = np.full(2 * self.n, -1, dtype=np.int64)
        self.meta = np.array([0, 0, int(x0.sites[0])], dtype=np.int64)
        if self.scheduler == _RF:
            _build_active(self.engine, self.kappa, self.colors, self.edges, self.pos, self.where, self.meta)
        self.clock = np.array([0.0, -1.0])
        self.rng = RngStream(cfg.seed).spawn(1)
        self.ctr = np.array([self.rng.counter], dtype=np.uint64)
        self.counts = np.zeros(6, dtype=np.int64)
        cap = 1024 if cfg.log_events else 1
        self.log_t = np.empty(cap, dtype=np.float64)
        self.log_e = np.empty(cap, dtype=np.int32)
        self.log_d = np.empty(cap, dtype=np.int8)
        self.log_k = np.empty(cap, dtype=np.int8)

    def _grow(self):
        cap = 2 * self.log_t.shape[0]
        for name in ("log_t", "log_e", "log_d", "log_k"):
            old = getattr(self, name)
            new = np.empty(cap, dtype=old.dtype)
            new[: old.shape[0]] = old
            setattr(self, name, new)

    def advance(self, t_stop: float):
        while True:
            status = _advance(self.engine, self.scheduler, self.kappa, self.colors, self.edges,
                              self.pos, self.where, self.meta, self.clock, self.ctr, self.rng.key,
                              float(t_stop), self.counts, self.log_t, self.log_e, self.log_d,
                              self.log_k, self.cfg.log_events)
            if status == _OK:
                break
            if status == _LOG_FULL:
                self._grow()
                continue
            raise EngineError(f"tied event times at t={self.clock[0]!r}; refusing to serialize")
        self.rng.advance(int(self.ctr[0]))

    def snapshot(self) -> Snapshot:
        t = float(self.clock[0])
        if self.engine == _VERTEX:
            x = Coloring(self.kappa, self.colors)
            e = embed(x) if self.kappa in EMBED_KAPPAS else None
        else:
            e = EdgeConfig(self.kappa, self.edges)
            x = reconstruct(int(self.meta[2]), e)
        return Snapshot(t, x, e)

    @property
    def n_active(self) -> int:
        return int(self.meta[0])

    def event_log(self) -> EventLog:
        m = int(self.meta[1])
        return EventLog(self.log_t[:m].copy(), self.log_e[:m].copy(), self.log_d[:m].copy(),
                        self.log_k[:m].copy(), 0.0, float(self.clock[0]), self.n, self.kappa,
                        self.scheduler == _NAIVE)


def initial_coloring(cfg: SimConfig) -> Coloring:
    return new_uniform_coloring(cfg.n_sites, cfg.kappa, RngStream(cfg.seed).spawn(0))


def run_cps(cfg: SimConfig, x0: Coloring | None = None) -> Trajectory:
    """Simulate one realization from ``x0`` (drawn from the seed if omitted)."""
    if x0 is None:
        x0 = initial_coloring(cfg)
    if x0.kappa != cfg.kappa or x0.n != cfg.n_sites:
        raise ValueError("initial coloring does not match the config")
    runner = _Runner(cfg, x0)
    snaps, counts = [], []
    for t in cfg.snapshot_times:
        runner.advance(t)
        snaps.append(runner.snapshot())
        counts.append(runner.counts.copy())
    runner.advance(cfg.t_max)
    return Trajectory(
        snapshots=snaps,
        events=runner.event_log() if cfg.log_events else None,
        final_time=float(cfg.t_max),
        kind_counts=counts,
        final=runner.snapshot(),
    )
