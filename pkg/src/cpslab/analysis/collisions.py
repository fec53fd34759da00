"""Collision accounting from event logs.

Particles present at the start of a window get stable ids: a directed
particle on edge ``i`` is id ``i``, a blockade on edge ``i`` is id
``N + i``, blockades minted later get ids from ``2N`` on. A Move transfers
the mover's id; Flip and Reflect keep the mover's id under its new type;
Annihilate retires both ids; BlockadeCreate retires both directed ids and
mints a blockade id.

While replaying, the tracker re-applies the edge rules to its own copy of
the configuration and refuses logs whose recorded kinds disagree with it.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from ..dynamics.cps import EventLog
from ..dynamics.rules import EventKind
from ..lattice import EdgeConfig

_MOVE, _ANN, _FLIP, _BC, _REFL, _NOOP = 0, 1, 2, 3, 4, 5


@njit(cache=True)
def _track(res, kappa, times, edges, dirs, kinds, t0, t1, first_t, first_kind, partner, removed_t,
           created_t, stats):
    """Replay events in (t0, t1]; returns (status, n_ids).

    stats[0] counts Reflects whose mover is a directed id and whose target
    is a blockade id.

    status 0 = ok, otherwise 1 + index of the first inconsistent event.
    """
    n = res.shape[0]
    ident = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        if res[i] == 1 or res[i] == kappa - 1:
            ident[i] = i
        elif kappa == 4 and res[i] == 2:
            ident[i] = n + i
    next_id = 2 * n
    for k in range(times.shape[0]):
        t = times[k]
        if t <= t0:
            continue
        if t > t1:
            break
        kind = kinds[k]
        if kind == _NOOP:
            continue
        e = edges[k]
        d = dirs[k]
        if d == 0:
            if res[e] != kappa - 1:
                return 1 + k, next_id
            ahead = (e + 1) % n
        else:
            if res[e] != 1:
                return 1 + k, next_id
            ahead = (e - 1 + n) % n
        a = res[ahead]
        # recompute the kind from the tracked state
        if a == 0:
            expect = _MOVE
        elif (d == 0 and a == 1) or (d == 1 and a == kappa - 1):
            expect = _ANN
        elif (d == 0 and a == kappa - 1) or (d == 1 and a == 1):
            expect = _FLIP if kappa == 3 else _BC
        else:
            expect = _REFL
        if expect != kind:
            return 1 + k, next_id
        mover = ident[e]
        hit = ident[ahead]
        if mover < 0 or mover >= n:
            return 1 + k, next_id
        res[e] = 0
        if d == 0:
            res[ahead] = (a + kappa - 1) % kappa
        else:
            res[ahead] = (a + 1) % kappa
        ident[e] = -1
        if kind == _MOVE:
            ident[ahead] = mover
            continue
        for pid, other in ((mover, hit), (hit, mover)):
            if first_t[pid] == math.inf:
                first_t[pid] = t
                first_kind[pid] = kind
                partner[pid] = other
        if kind == _ANN:
            ident[ahead] = -1
            removed_t[mover] = t
            removed_t[hit] = t
        elif kind == _BC:
            removed_t[mover] = t
            removed_t[hit] = t
            ident[ahead] = next_id
            created_t[next_id] = t
            next_id += 1
        else:
            # Flip removes the hit particle, Reflect removes the blockade
            if kind == _REFL and hit >= n:
                stats[0] += 1
            removed_t[hit] = t
            ident[ahead] = mover
    return 0, next_id


@dataclass
class CollisionHistory:
    """Per-id outcome of a window replay (ids as in the module docstring)."""

    n_sites: int
    t0: float
    t1: float
    first_time: np.ndarray
    first_kind: np.ndarray
    partner: np.ndarray
    removed_time: np.ndarray
    created_time: np.ndarray
    n_ids: int
    directed_at_t0: np.ndarray  # edge indices
    blockades_at_t0: np.ndarray
    paired_reflects: int = 0

    def directed_first_collision(self) -> np.ndarray:
        """First-collision time per edge for directed particles at t0 (nan elsewhere)."""
        out = np.full(self.n_sites, np.nan)
        out[self.directed_at_t0] = self.first_time[self.directed_at_t0]
        return out


def track_collisions(log: EventLog, e_t: EdgeConfig, t: float, s: float | None = None) -> CollisionHistory:
    """Follow every particle present at time ``t`` through the log up to ``s``."""
    if s is None:
        s = log.t_end
    if s < t:
        raise ValueError("window end precedes its start")
    if t < log.t_start or s > log.t_end:
        raise ValueError(f"window [{t}, {s}] is not covered by the log [{log.t_start}, {log.t_end}]")
    if log.n_sites and log.n_sites != e_t.n:
        raise ValueError("log and configuration disagree on the ring size")
    n = e_t.n
    n_created = int(np.count_nonzero(log.kind == EventKind.BLOCKADE_CREATE))
    size = 2 * n + n_created
    first_t = np.full(size, np.inf)
    first_kind = np.full(size, -1, dtype=np.int64)
    partner = np.full(size, -1, dtype=np.int64)
    removed = np.full(size, np.inf)
    created = np.full(size, np.nan)
    res = e_t.residues.astype(np.int64)
    stats = np.zeros(1, dtype=np.int64)
    status, n_ids = _track(res, e_t.kappa, log.time, log.edge.astype(np.int64), log.direction.astype(np.int64),
                           log.kind.astype(np.int64), float(t), float(s), first_t, first_kind, partner,
                           removed, created, stats)
    if status:
        k = status - 1
        raise ValueError(f"event {k} ({log[k]}) is inconsistent with the configuration at t={t}")
    sig = e_t.signed
    return CollisionHistory(n, float(t), float(s), first_t, first_kind, partner, removed, created, n_ids,
                            np.flatnonzero((sig == 1) | (sig == -1)), np.flatnonzero(sig == 2),
                            int(stats[0]))


def collision_indicator_count(events: EventLog, e_t: EdgeConfig, t: float, s: float, edges=None) -> int:
    """Number of directed particles present at ``t`` that collide during (t, s].

    ``edges`` optionally restricts the count to particles whose time-t edge
    lies in the given collection (e.g. ``range(a, b)``).
    """
    hist = track_collisions(events, e_t, t, s)
    first = hist.first_time[hist.directed_at_t0]
    hit = hist.directed_at_t0[first <= s]
    if edges is not None:
        allowed = np.zeros(e_t.n, dtype=bool)
        allowed[np.asarray(list(edges), dtype=np.int64) % e_t.n] = True
        hit = hit[allowed[hit]]
    return int(hit.size)


@dataclass
class AuditReport:
    t: float
    t_end: float
    blockades_at_t: int
    directed_at_t: int
    original_blockades_removed: int
    directed_first_collision_reflect: int
    directed_later_reflects: int
    blockades_created: int
    created_blockades_removed: int
    reflect_events: int
    blockade_removals: int
    pairing_exact: bool
    removals_equal_reflects: bool
    inequality_holds: bool

    def to_json(self) -> dict:
        return asdict(self)


def mass_transport_audit(events: EventLog, e0: EdgeConfig, t: float = 0.0) -> AuditReport:
    """Blockade-removal ledger for a kappa = 4 log starting at ``t``.

    ``inequality_holds`` checks (blockades at t later removed) <=
    (directed particles whose first collision is a Reflect) + (blockades
    created after t and later removed).
    """
    if e0.kappa != 4:
        raise ValueError("the mass-transport audit applies to kappa = 4 only")
    hist = track_collisions(events, e0, t, events.t_end)
    n = hist.n_sites
    b_ids = n + hist.blockades_at_t0
    a = int(np.count_nonzero(np.isfinite(hist.removed_time[b_ids])))
    d_ids = hist.directed_at_t0
    b = int(np.count_nonzero(hist.first_kind[d_ids] == _REFL))
    created_ids = np.arange(2 * n, hist.n_ids)
    c = int(np.count_nonzero(np.isfinite(hist.removed_time[created_ids])))

    window = (events.time > t) & (events.time <= events.t_end)
    refl = np.flatnonzero(window & (events.kind == _REFL))
    n_refl = int(refl.size)

    # every Reflect must pair one directed id (< N) with one blockade id (>= N)
    blockade_removals = a + c
    pairing = hist.paired_reflects == n_refl == blockade_removals
    return AuditReport(
        t=float(t), t_end=float(events.t_end),
        blockades_at_t=int(hist.blockades_at_t0.size), directed_at_t=int(d_ids.size),
        original_blockades_removed=a, directed_first_collision_reflect=b,
        directed_later_reflects=n_refl - b,
        blockades_created=int(created_ids.size), created_blockades_removed=c,
        reflect_events=n_refl, blockade_removals=blockade_removals,
        pairing_exact=bool(pairing), removals_equal_reflects=blockade_removals == n_refl,
        inequality_holds=a <= b + c,
    )

