"""Synchronous cyclic cellular automaton on a ring."""
from __future__ import annotations

from typing import Iterator

import numpy as np

from ..lattice import Coloring


def cca_update(y: np.ndarray, kappa: int) -> np.ndarray:
    """One synchronous step: a site advances iff a neighbor holds its successor."""
    succ = y + 1
    succ[succ == kappa] = 0
    bump = (np.roll(y, 1) == succ) | (np.roll(y, -1) == succ)
    return np.where(bump, succ, y)


def iterate_cca(y0: Coloring, steps: int) -> Iterator[np.ndarray]:
    """Yield the rows Y_0, ..., Y_steps as int8 arrays (constant memory)."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if y0.kappa > 127:
        raise ValueError("CCA rows are stored as int8; kappa must be <= 127")
    y = y0.sites.astype(np.int8)
    yield y
    for _ in range(steps):
        y = cca_update(y, y0.kappa)
        yield y


def run_cca(y0: Coloring, steps: int) -> list[Coloring]:
    return [Coloring(y0.kappa, row) for row in iterate_cca(y0, steps)]
