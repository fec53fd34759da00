"""Running sums of r/l particles and r-before-l matchings on an interval.

Edge sequences are read as a cut-open interval ``[0, n]``: position ``y``
is the edge ``y + 1/2``. A pair ``(e, e')`` is admissible when ``e < e'``,
``xi[e]`` is R and ``xi[e']`` is L; a matching uses each edge at most once.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..lattice import as_signed

DEFAULT_BRUTE_FORCE_BOUND = 16


@dataclass(frozen=True)
class RunningSumProfile:
    R: np.ndarray
    L: np.ndarray
    S: np.ndarray
    C: np.ndarray
    m: int  # min of S(y) over 0 <= y < n

    @property
    def m_closed(self) -> int:
        """min of S over the closed interval [0, n]."""
        return int(self.S.min())

    @property
    def n(self) -> int:
        return self.S.size - 1

    def matched_particles(self) -> int:
        """C(n) - (2|min S| + S(n)): the size of the water-filling matching, in particles.

        The minimum runs over the closed interval [0, n]. With ``m`` alone the
        count is off by two whenever S(n) is a new strict minimum (e.g. ``[L]``).
        """
        return int(self.C[-1] - (2 * -self.m_closed + self.S[-1]))


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def shifted(self, offset: int) -> "Matching":
        return Matching(tuple((a + offset, b + offset) for a, b in self.pairs))


def _cut(xi, n):
    s = as_signed(xi)
    if n is None:
        n = s.size
    if not 1 <= n <= s.size:
        raise ValueError(f"interval length must lie in [1, {s.size}]")
    return s[:n]


def running_sums(xi, n: int | None = None) -> RunningSumProfile:
    s = _cut(xi, n)
    R = np.concatenate(([0], np.cumsum(s == -1)))
    L = np.concatenate(([0], np.cumsum(s == 1)))
    S = R - L
    return RunningSumProfile(R, L, S, R + L, int(S[:-1].min()))


def water_fill_matching(xi, n: int | None = None) -> Matching:
    """Pair each upcrossing with the next downcrossing at the same height.

    Equivalently: scanning left to right, an L closes the most recent
    unmatched R. Edges that are vacant or blockades leave the height
    unchanged and are skipped.
    """
    s = _cut(xi, n)
    open_r: list[int] = []
    pairs = []
    for y, v in enumerate(s.tolist()):
        if v == -1:
            open_r.append(y)
        elif v == 1 and open_r:
            pairs.append((open_r.pop(), y))
    pairs.sort()
    return Matching(tuple(pairs))


def is_valid_matching(xi, matching: Matching) -> bool:
    s = as_signed(xi)
    used = set()
    for e, e2 in matching:
        if not (0 <= e < e2 < s.size and s[e] == -1 and s[e2] == 1):
            return False
        if e in used or e2 in used:
            return False
        used.update((e, e2))
    return True


@lru_cache(maxsize=None)
def _max_pairs(pattern: tuple[int, ...]) -> int:
    # Exhaustive: the first R is either left out or paired with any later free L.
    ls = [j for j, v in enumerate(pattern) if v == 1]
    rs = [i for i, v in enumerate(pattern) if v == -1]

    @lru_cache(maxsize=None)
    def best(k: int, used: int) -> int:
        if k == len(rs):
            return 0
        out = best(k + 1, used)
        for b, j in enumerate(ls):
            if j > rs[k] and not used >> b & 1:
                out = max(out, 1 + best(k + 1, used | 1 << b))
        return out

    return best(0, 0)


def brute_force_max_matching(xi, bound: int = DEFAULT_BRUTE_FORCE_BOUND) -> int:
    """Maximum number of admissible pairs, by exhaustive search.

    Only the relative order of R and L matters, so the search runs on the
    R/L subsequence (vacant and blockade edges dropped).
    """
    s = as_signed(xi)
    if s.size > bound:
        raise ValueError(f"sequence length {s.size} exceeds the brute-force bound {bound}")
    return _max_pairs(tuple(int(v) for v in s if v in (-1, 1)))


def pairs_by_definition(xi, n: int | None = None) -> set[tuple[int, int]]:
    """All (x, y) with s(x) = s(y+1) and s(t) > s(x) for x < t < y+1.

    Direct O(n^3) reading of the pairing rule on the interpolated path.
    """
    S = running_sums(xi, n).S
    n = S.size - 1
    out = set()
    for x in range(n):
        for y in range(x, n):
            if S[x] != S[y + 1]:
                continue
            # on (x, x+1) the interpolation exceeds s(x) only if the step is up
            if S[x + 1] <= S[x]:
                continue
            if all(S[t] > S[x] for t in range(x + 1, y + 1)):
                out.add((x, y))
    return out
