"""Across-replica estimates of P(X_t(x) = X_t(y))."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..lattice import Coloring
from .density import density_estimate


@dataclass(frozen=True)
class ClusteringEstimate:
    p_same: float
    se: float
    n_replicas: int
    r_mean: float
    union_bound: float  # |y - x| * r, an upper bound on P(X(x) != X(y))

    @property
    def p_same_lower_bound(self) -> float:
        return max(0.0, 1.0 - self.union_bound)


def clustering_probe(snapshots: Sequence[Coloring], x: int, y: int) -> ClusteringEstimate:
    """Fraction of replicas in which sites x and y agree, with binomial s.e.

    ``snapshots`` holds one coloring per replica, all at the same time.
    """
    if not snapshots:
        raise ValueError("need at least one replica")
    k = len(snapshots)
    n = snapshots[0].n
    agree = sum(int(s.sites[x % n] == s.sites[y % n]) for s in snapshots)
    p = agree / k
    r = float(np.mean([density_estimate(s)[2] for s in snapshots]))
    dist = abs(y - x)
    if dist > n // 2:
        dist = n - dist
    return ClusteringEstimate(p_same=p, se=math.sqrt(p * (1 - p) / k), n_replicas=k,
                              r_mean=r, union_bound=dist * r)
