"""Ballistic annihilation on the line with velocities in {-1, 0, +1}.

Every contact removes both particles, blockade-mover contacts included.
Collisions are processed in time order from a heap of adjacent-pair
candidates; a pair meeting at the same instant as another is ordered by the
left particle's index, so a three-way meeting removes the leftmost pair.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..rng import RngStream


class Collision(NamedTuple):
    time: float
    position: float
    left: int
    right: int


@dataclass
class BallisticState:
    """Particles at a common time. Indices are stable particle ids."""

    positions: np.ndarray
    velocities: np.ndarray
    alive: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.velocities = np.asarray(self.velocities, dtype=np.int8)
        self.alive = np.asarray(self.alive, dtype=bool)
        if not (self.positions.shape == self.velocities.shape == self.alive.shape):
            raise ValueError("positions, velocities and alive must have equal length")
        if np.any(np.abs(self.velocities) > 1):
            raise ValueError("velocities must lie in {-1, 0, 1}")

    @classmethod
    def from_pairs(cls, pairs) -> "BallisticState":
        pairs = list(pairs)
        pos = [p for p, _ in pairs]
        vel = [v for _, v in pairs]
        return cls(np.array(pos, dtype=np.float64), np.array(vel), np.ones(len(pairs), dtype=bool))

    @property
    def n_alive(self) -> int:
        return int(self.alive.sum())


@dataclass
class BallisticResult:
    state: BallisticState
    collisions: list[Collision]
    death_time: np.ndarray  # inf for survivors

    def alive_at(self, t: float, ids: np.ndarray | None = None) -> int:
        d = self.death_time if ids is None else self.death_time[ids]
        return int(np.count_nonzero(d > t))


def poisson_ballistic_state(n: int, velocities, rng: RngStream) -> BallisticState:
    """Unit-intensity Poisson positions and velocities uniform on ``velocities``.

    Consumes 2n draws: n gaps, then n velocity choices.
    """
    velocities = np.asarray(list(velocities), dtype=np.int8)
    if velocities.size == 0:
        raise ValueError("need at least one velocity")
    pos = np.cumsum(rng.exponential(1.0, n))
    vel = velocities[rng.integers(velocities.size, n)]
    return BallisticState(pos, vel, np.ones(n, dtype=bool))


def run_ba(init: BallisticState, t_max: float) -> BallisticResult:
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    x0 = init.positions
    v = init.velocities.astype(np.int64)
    ids = np.flatnonzero(init.alive)
    if ids.size > 1 and np.any(np.diff(x0[ids]) <= 0):
        raise ValueError("initial positions of live particles must be strictly increasing")
    n = x0.size
    # positions at time 0 of the reference frame; x(t) = x0 + v (t - t0)
    base = x0 - v * init.time
    prev = np.full(n, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    prev[ids[1:]] = ids[:-1]
    nxt[ids[:-1]] = ids[1:]
    alive = init.alive.copy()
    death = np.full(n, np.inf)

    heap: list[tuple[float, int, int]] = []

    def schedule(i: int, j: int):
        if i < 0 or j < 0 or v[i] <= v[j]:
            return
        tc = (base[j] - base[i]) / (v[i] - v[j])
        if tc <= t_max:
            heapq.heappush(heap, (max(tc, init.time), i, j))

    for i, j in zip(ids[:-1], ids[1:]):
        schedule(int(i), int(j))

    collisions = []
    while heap:
        tc, i, j = heapq.heappop(heap)
        if not (alive[i] and alive[j] and nxt[i] == j):
            continue
        alive[i] = alive[j] = False
        death[i] = death[j] = tc
        collisions.append(Collision(float(tc), float(base[i] + v[i] * tc), int(i), int(j)))
        p, q = prev[i], nxt[j]
        if p >= 0:
            nxt[p] = q
        if q >= 0:
            prev[q] = p
        schedule(int(p), int(q))

    # dead particles stay where they collided
    pos = np.where(init.alive, base + v * np.minimum(death, t_max), x0)
    state = BallisticState(pos, init.velocities.copy(), alive, float(t_max))
    return BallisticResult(state, collisions, death)
