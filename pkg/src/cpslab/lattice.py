"""Colorings of a ring and their edge-particle embedding.

Sites are ``0..N-1`` on a ring. Edge ``i`` joins sites ``i`` and
``(i+1) % N``; it stands for the half-integer edge ``i + 1/2`` on Z.

An edge carries the color difference ``d = x[i+1] - x[i] (mod kappa)``:

====== ============ ============
kind   signed value  residue d
====== ============ ============
R      -1            kappa - 1
Vacant  0            0
L      +1            1
B      +2            2 (kappa = 4 only)
====== ============ ============

EdgeConfig stores residues; the signed value is what the running sums and
the signed-sum invariant use.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .rng import RngStream

EMBED_KAPPAS = (3, 4)


class EdgeKind(enum.IntEnum):
    R = -1
    VACANT = 0
    L = 1
    B = 2

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]

    @classmethod
    def from_symbol(cls, s: str) -> "EdgeKind":
        try:
            return _FROM_SYMBOL[s]
        except KeyError:
            raise ValueError(f"unknown edge symbol {s!r}") from None


_SYMBOLS = {EdgeKind.R: "R", EdgeKind.VACANT: ".", EdgeKind.L: "L", EdgeKind.B: "B"}
_FROM_SYMBOL = {v: k for k, v in _SYMBOLS.items()}
_FROM_SYMBOL["V"] = EdgeKind.VACANT


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Coloring:
    """A kappa-coloring of the N-site ring. ``sites`` is a read-only int array."""

    kappa: int
    sites: np.ndarray

    def __post_init__(self):
        sites = np.asarray(self.sites)
        if self.kappa < 2:
            raise ValueError(f"kappa must be >= 2, got {self.kappa}")
        if sites.ndim != 1 or sites.size < 2:
            raise ValueError("a coloring needs at least 2 sites")
        if sites.size and (sites.min() < 0 or sites.max() >= self.kappa):
            raise ValueError(f"site colors must lie in [0, {self.kappa})")
        object.__setattr__(self, "sites", _frozen(sites.astype(np.int32)))

    @property
    def n(self) -> int:
        return int(self.sites.size)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Coloring):
            return NotImplemented
        return self.kappa == other.kappa and np.array_equal(self.sites, other.sites)

    def __hash__(self):
        return hash((self.kappa, self.sites.tobytes()))

    def __repr__(self):
        body = self.sites.tolist() if self.n <= 16 else f"<{self.n} sites>"
        return f"Coloring(kappa={self.kappa}, sites={body})"

    def shifted(self, c: int) -> "Coloring":
        return Coloring(self.kappa, (self.sites + c) % self.kappa)

    def reversed(self) -> "Coloring":
        return Coloring(self.kappa, self.sites[::-1])

    def to_json(self) -> dict:
        return {"kappa": self.kappa, "sites": self.sites.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Coloring":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["kappa"]), np.asarray(obj["sites"], dtype=np.int64))


def residue_to_signed(residues: np.ndarray, kappa: int) -> np.ndarray:
    signed = np.asarray(residues, dtype=np.int8).copy()
    signed[signed == kappa - 1] = -1
    return signed


def signed_to_residue(signed: np.ndarray, kappa: int) -> np.ndarray:
    return np.mod(np.asarray(signed, dtype=np.int64), kappa).astype(np.int8)


@dataclass(frozen=True, eq=False)
class EdgeConfig:
    """Edge-particle configuration of a ring, stored as residues mod kappa."""

    kappa: int
    residues: np.ndarray

    def __post_init__(self):
        if self.kappa not in EMBED_KAPPAS:
            raise ValueError(f"edge configurations exist for kappa in {EMBED_KAPPAS}, got {self.kappa}")
        r = np.asarray(self.residues)
        if r.ndim != 1 or r.size < 1:
            raise ValueError("edge configuration must be a non-empty 1-d sequence")
        if r.min() < 0 or r.max() >= self.kappa:
            raise ValueError("residues out of range")
        object.__setattr__(self, "residues", _frozen(r.astype(np.int8)))

    @classmethod
    def from_kinds(cls, kinds: Iterable, kappa: int) -> "EdgeConfig":
        """Build from EdgeKinds, signed ints or symbols ("R", "L", "B", ".")."""
        signed = as_signed(kinds)
        if kappa == 3 and np.any(signed == 2):
            raise ValueError("blockades only exist for kappa = 4")
        return cls(kappa, signed_to_residue(signed, kappa))

    @property
    def n(self) -> int:
        return int(self.residues.size)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, EdgeConfig):
            return NotImplemented
        return self.kappa == other.kappa and np.array_equal(self.residues, other.residues)

    def __hash__(self):
        return hash((self.kappa, self.residues.tobytes()))

    def __repr__(self):
        body = self.symbols() if self.n <= 40 else f"<{self.n} edges>"
        return f"EdgeConfig(kappa={self.kappa}, {body!r})"

    @property
    def signed(self) -> np.ndarray:
        return residue_to_signed(self.residues, self.kappa)

    def kinds(self) -> list[EdgeKind]:
        return [EdgeKind(int(v)) for v in self.signed]

    def symbols(self) -> str:
        return "".join(_SYMBOLS[EdgeKind(int(v))] for v in self.signed)

    def signed_sum(self) -> int:
        return int(self.signed.astype(np.int64).sum())

    def counts(self) -> dict[EdgeKind, int]:
        s = self.signed
        return {k: int(np.count_nonzero(s == k)) for k in EdgeKind}

    def n_directed(self) -> int:
        s = self.signed
        return int(np.count_nonzero((s == 1) | (s == -1)))

    def n_blockades(self) -> int:
        return int(np.count_nonzero(self.signed == 2))

    def to_json(self) -> dict:
        return {"kappa": self.kappa, "edges": list(self.symbols())}

    @classmethod
    def from_json(cls, obj) -> "EdgeConfig":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_kinds(obj["edges"], int(obj["kappa"]))


def as_signed(xi) -> np.ndarray:
    """Signed edge values (-1, 0, 1, 2) from any supported edge sequence.

    Accepts an EdgeConfig, a string of symbols, or an iterable of EdgeKinds,
    symbols or signed integers.
    """
    if isinstance(xi, EdgeConfig):
        return xi.signed
    if isinstance(xi, np.ndarray) and xi.dtype.kind in "iu":
        out = xi.astype(np.int8)
    else:
        vals = []
        for v in xi:
            if isinstance(v, str):
                vals.append(int(EdgeKind.from_symbol(v)))
            else:
                vals.append(int(v))
        out = np.asarray(vals, dtype=np.int8)
    if out.size and (out.min() < -1 or out.max() > 2):
        raise ValueError("signed edge values must lie in {-1, 0, 1, 2}")
    return out


def new_uniform_coloring(n: int, kappa: int, rng: RngStream) -> Coloring:
    """I.i.d. uniform colors; consumes exactly ``n`` draws from ``rng``."""
    if n < 2:
        raise ValueError(f"need n >= 2 sites, got {n}")
    if kappa < 2:
        raise ValueError(f"need kappa >= 2, got {kappa}")
    return Coloring(kappa, rng.integers(kappa, n))


def edge_residues(sites: np.ndarray, kappa: int) -> np.ndarray:
    return np.mod(np.roll(sites, -1) - sites, kappa).astype(np.int8)


def embed(x: Coloring) -> EdgeConfig:
    if x.kappa not in EMBED_KAPPAS:
        raise ValueError(f"embedding is defined for kappa in {EMBED_KAPPAS}, got {x.kappa}")
    return EdgeConfig(x.kappa, edge_residues(x.sites, x.kappa))


def reconstruct(base_color: int, e: EdgeConfig) -> Coloring:
    """Inverse of :func:`embed` given the color of site 0."""
    if not 0 <= base_color < e.kappa:
        raise ValueError(f"base color must lie in [0, {e.kappa})")
    if e.signed_sum() % e.kappa != 0:
        raise ValueError("signed sum is not 0 mod kappa; configuration is not realizable on a ring")
    if e.n < 2:
        raise ValueError("a ring needs at least 2 sites")
    sites = base_color + np.concatenate(([0], np.cumsum(e.residues[:-1].astype(np.int64))))
    return Coloring(e.kappa, np.mod(sites, e.kappa))


def reverse_edges(e: EdgeConfig) -> EdgeConfig:
    """Mirror image: R and L swapped, B fixed, order reversed.

    Matches the site reflection ``i -> N-1-i``, which sends edge ``i`` to
    edge ``N-2-i (mod N)``.
    """
    s = np.roll(e.signed[::-1], -1).copy()
    s[(s == 1) | (s == -1)] *= -1
    return EdgeConfig.from_kinds(s, e.kappa)
