"""Particle densities and their across-replica aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..lattice import Coloring, EdgeConfig, edge_residues


def density_counts(e: EdgeConfig) -> tuple[int, int]:
    """(#directed, #blockades)."""
    return e.n_directed(), e.n_blockades()


def coloring_counts(x: Coloring) -> tuple[int, int]:
    """(#directed, #other unequal) edges for any kappa.

    Differences of +-1 are directed particles; any other nonzero difference
    is inert (the blockade for kappa = 4).
    """
    d = edge_residues(x.sites, x.kappa)
    directed = (d == 1) | (d == x.kappa - 1)
    return int(np.count_nonzero(directed)), int(np.count_nonzero((d != 0) & ~directed))


def density_estimate(e) -> tuple[float, float, float]:
    """(p, q, r) spatial averages of an EdgeConfig or a Coloring of any kappa."""
    if isinstance(e, Coloring):
        nd, nb = coloring_counts(e)
    else:
        nd, nb = density_counts(e)
    p, q = nd / e.n, nb / e.n
    return p, q, (nd + nb) / e.n


@dataclass
class DensityRow:
    t: float
    p: float
    q: float
    r: float
    n_edges: int
    n_replicas: int
    se_r: float


@dataclass
class DensityTrace:
    rows: list[DensityRow]

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    @property
    def r(self) -> np.ndarray:
        return self.column("r")

    @classmethod
    def from_arrays(cls, t, r, p=None, q=None, n_edges=0, n_replicas=1, se_r=None) -> "DensityTrace":
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        p = r if p is None else np.asarray(p, dtype=float)
        q = np.zeros_like(r) if q is None else np.asarray(q, dtype=float)
        se = np.zeros_like(r) if se_r is None else np.asarray(se_r, dtype=float)
        return cls([DensityRow(float(a), float(b), float(c), float(d), int(n_edges), int(n_replicas), float(s))
                    for a, b, c, d, s in zip(t, p, q, r, se)])


@dataclass
class _Sums:
    directed: int = 0
    blockades: int = 0
    directed2: int = 0
    blockades2: int = 0
    total2: int = 0
    cross: int = 0
    replicas: int = 0


def _se(s1: int, s2: int, k: int, n: int) -> float:
    """Standard error of the mean of k per-replica fractions count/n."""
    if k < 2:
        return math.nan
    var = (s2 - s1 * s1 / k) / (k - 1)
    return math.sqrt(max(var, 0.0) / k) / n


@dataclass
class DensityAccumulator:
    """Exact integer sums of per-replica counts, keyed by sample time.

    ``merge`` only adds integers, so it is associative and commutative and
    the aggregate does not depend on replica completion order.
    """

    n_edges: int
    sums: dict[float, _Sums] = field(default_factory=dict)

    def add(self, t: float, directed: int, blockades: int) -> None:
        s = self.sums.setdefault(float(t), _Sums())
        s.directed += directed
        s.blockades += blockades
        s.directed2 += directed * directed
        s.blockades2 += blockades * blockades
        tot = directed + blockades
        s.total2 += tot * tot
        s.cross += directed * blockades
        s.replicas += 1

    def add_edges(self, t: float, e) -> None:
        if isinstance(e, Coloring):
            self.add(t, *coloring_counts(e))
        else:
            self.add(t, *density_counts(e))

    def merge(self, other: "DensityAccumulator") -> "DensityAccumulator":
        if other.n_edges != self.n_edges:
            raise ValueError("cannot merge traces over different ring sizes")
        out = DensityAccumulator(self.n_edges)
        for src in (self, other):
            for t, s in src.sums.items():
                d = out.sums.setdefault(t, _Sums())
                for name in vars(s):
                    setattr(d, name, getattr(d, name) + getattr(s, name))
        return out

    def times(self) -> list[float]:
        return sorted(self.sums)

    def stats(self, t: float) -> dict[str, float]:
        s = self.sums[float(t)]
        k, n = s.replicas, self.n_edges
        p = s.directed / (k * n)
        q = s.blockades / (k * n)
        return {
            "p": p,
            "q": q,
            "r": (s.directed + s.blockades) / (k * n),
            "se_p": _se(s.directed, s.directed2, k, n),
            "se_q": _se(s.blockades, s.blockades2, k, n),
            "se_r": _se(s.directed + s.blockades, s.total2, k, n),
            "se_p_minus_q": _se(s.directed - s.blockades,
                                s.directed2 - 2 * s.cross + s.blockades2, k, n),
            # plug-in binomial error, treating all k*n edges as independent
            "binom_se_r": math.sqrt(max(p + q, 0) * max(1 - p - q, 0) / (k * n)),
            "n_replicas": k,
        }

    def trace(self) -> DensityTrace:
        rows = []
        for t in self.times():
            st = self.stats(t)
            rows.append(DensityRow(t, st["p"], st["q"], st["r"], self.n_edges,
                                   int(st["n_replicas"]), st["se_r"]))
        return DensityTrace(rows)
