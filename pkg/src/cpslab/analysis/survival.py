"""Survival of r particles in the 3-color CCA via running sums.

In the 3-color CCA all r particles move right and all l particles move left
at unit speed, and opposing particles annihilate on meeting. An r is on
edge x at time t iff at time 0 there was an r on edge x-t and the running
count of r minus l over edges x-t, ..., j stays >= 1 for every j up to
x+t.
"""
from __future__ import annotations

from typing import Iterator

import numpy as np

from ..lattice import Coloring, edge_residues


def _steps(y0: Coloring) -> tuple[np.ndarray, np.ndarray]:
    if y0.kappa != 3:
        raise ValueError("the survival criterion is for the 3-color CCA")
    d = edge_residues(y0.sites, 3)
    is_r = d == 2
    return is_r, is_r.astype(np.int64) - (d == 1).astype(np.int64)


def _check_window(n: int, t: int):
    if t < 0:
        raise ValueError("t must be non-negative")
    if n <= 2 * t + 2:
        raise ValueError(f"window of 2t+2 = {2 * t + 2} sites wraps a ring of {n} sites")


def cca_survival_criterion(y0: Coloring, x: int, t: int) -> bool:
    """Whether an r sits on edge ``x`` at CCA time ``t``, read off ``y0`` alone."""
    n = y0.n
    _check_window(n, t)
    is_r, step = _steps(y0)
    start = (x - t) % n
    if not is_r[start]:
        return False
    total = 0
    for j in range(2 * t + 1):
        total += int(step[(start + j) % n])
        if total < 1:
            return False
    return True


def survival_maps(y0: Coloring, t_max: int) -> Iterator[np.ndarray]:
    """Criterion for every edge at t = 0, 1, ..., t_max (O(N) per step)."""
    n = y0.n
    _check_window(n, t_max)
    is_r, step = _steps(y0)
    ext = np.concatenate(([0], np.cumsum(np.tile(step, 3))))
    a = np.arange(n)
    base = ext[a]
    window_min = ext[a + 1]
    for t in range(t_max + 1):
        if t > 0:
            window_min = np.minimum(window_min, np.minimum(ext[a + 2 * t], ext[a + 2 * t + 1]))
        ok = is_r & (window_min - base >= 1)
        yield np.roll(ok, t)


def r_presence(row: np.ndarray) -> np.ndarray:
    """Edges carrying an r in a 3-color row."""
    return edge_residues(np.asarray(row), 3) == 2
