"""Virtual particles: non-interacting tracers moved by the real clocks.

A virtual r on edge e steps to e+1 whenever the ``+`` clock of e fires; a
virtual l on edge e steps to e-1 on the ``-`` clock of e. They never change
type and never interact.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..rng import RngStream
from .cps import EventLog


def simulate_virtual_pair(gap: int, rng: RngStream) -> float:
    """Elapsed time until a virtual r and l, ``gap`` edges apart, coincide.

    Each tracer has its own rate-1 clock; whichever fires first steps
    inward. Consumes ``gap + 1`` draws when ``gap >= 1`` and none for 0.
    """
    if gap < 0:
        raise ValueError("gap must be non-negative")
    if gap == 0:
        return 0.0
    draws = rng.exponential(1.0, gap + 1).tolist()
    t_r, t_l = draws[0], draws[1]
    k = 2
    for closed in range(1, gap + 1):
        if t_r < t_l:
            now = t_r
            if closed < gap:
                t_r += draws[k]
                k += 1
        else:
            now = t_l
            if closed < gap:
                t_l += draws[k]
                k += 1
    return now


def sample_virtual_pairs(gap: int, n_samples: int, rng: RngStream) -> np.ndarray:
    return np.array([simulate_virtual_pair(gap, rng) for _ in range(n_samples)])


@njit(cache=True)
def _replay_pair(times, edges, dirs, n, t, a, b):
    r = a
    l = b
    if r >= l:
        return t
    for i in range(times.shape[0]):
        if times[i] <= t:
            continue
        e = edges[i]
        if dirs[i] == 0:
            if e == r % n:
                r += 1
        elif e == l % n:
            l -= 1
        if r == l:
            return times[i]
    return math.inf


def virtual_pair_collision_time(log: EventLog, t: float, a: int, b: int) -> float:
    """Absolute time at which virtual r (from edge a) and l (from edge b) meet.

    Positions are unwrapped: ``a < b`` with ``b - a < N``; clock lookups are
    taken mod N. Returns ``inf`` if they have not met by the end of the log.
    The log must record every clock firing (Naive scheduler).
    """
    if not log.all_clocks:
        raise ValueError("virtual particles need a log of every clock firing (Naive scheduler)")
    if t < log.t_start or t > log.t_end:
        raise ValueError("start time outside the log")
    if not 0 <= b - a < log.n_sites:
        raise ValueError("need 0 <= b - a < N")
    return float(_replay_pair(log.time, log.edge, log.direction, log.n_sites, float(t), int(a), int(b)))
