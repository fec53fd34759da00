"""Single-clock update rules at vertex and edge level.

A directed clock is an (edge, direction) pair. ``+`` on edge ``i`` means
site ``i`` pushes onto site ``i+1``; ``-`` means site ``i+1`` pushes onto
site ``i`` (indices mod N). The target adopts the source color iff
``target == source - 1 (mod kappa)``.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from ..lattice import Coloring, EdgeConfig


class Direction(enum.IntEnum):
    PLUS = 0
    MINUS = 1

    @property
    def symbol(self) -> str:
        return "+" if self is Direction.PLUS else "-"

    @classmethod
    def parse(cls, d) -> "Direction":
        """Accepts a Direction, its int code, or the symbols "+" / "-"."""
        if isinstance(d, str):
            if d == "+":
                return cls.PLUS
            if d == "-":
                return cls.MINUS
            raise ValueError(f"unknown direction {d!r}")
        return cls(int(d))


class EventKind(enum.IntEnum):
    MOVE = 0
    ANNIHILATE = 1
    FLIP = 2
    BLOCKADE_CREATE = 3
    REFLECT = 4
    NOOP = 5

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, s: str) -> "EventKind":
        return _FROM_LABEL[s]


_LABELS = {
    EventKind.MOVE: "Move",
    EventKind.ANNIHILATE: "Annihilate",
    EventKind.FLIP: "Flip",
    EventKind.BLOCKADE_CREATE: "BlockadeCreate",
    EventKind.REFLECT: "Reflect",
    EventKind.NOOP: "NoOp",
}
_FROM_LABEL = {v: k for k, v in _LABELS.items()}

COLLISION_KINDS = (EventKind.ANNIHILATE, EventKind.FLIP, EventKind.BLOCKADE_CREATE, EventKind.REFLECT)


class EventRecord(NamedTuple):
    time: float
    edge: int
    direction: Direction
    kind: EventKind


def endpoints(n: int, edge: int, direction: Direction) -> tuple[int, int]:
    """(source, target) sites of a directed clock on an n-site ring."""
    if not 0 <= edge < n:
        raise IndexError(f"edge {edge} out of range for {n} sites")
    if direction == Direction.PLUS:
        return edge, (edge + 1) % n
    return (edge + 1) % n, edge


def classify_neighbor(direction: int, neighbor: int, kappa: int) -> EventKind:
    """Kind of a firing that changes state, from the residue of the edge ahead.

    For ``+`` the edge ahead is ``i+1``, for ``-`` it is ``i-1``. Outside
    kappa in {3, 4} every state change is reported as a Move.
    """
    if kappa not in (3, 4):
        return EventKind.MOVE
    if neighbor == 0:
        return EventKind.MOVE
    same = kappa - 1 if direction == Direction.PLUS else 1
    opposite = 1 if direction == Direction.PLUS else kappa - 1
    if neighbor == opposite:
        return EventKind.ANNIHILATE
    if neighbor == same:
        return EventKind.FLIP if kappa == 3 else EventKind.BLOCKADE_CREATE
    return EventKind.REFLECT


def vertex_apply(sites: np.ndarray, kappa: int, edge: int, direction: int) -> bool:
    """In-place vertex update; returns whether the state changed."""
    n = sites.shape[0]
    src, tgt = endpoints(n, edge, Direction(direction))
    if sites[tgt] == (sites[src] - 1) % kappa:
        sites[tgt] = sites[src]
        return True
    return False


def edge_apply(res: np.ndarray, kappa: int, edge: int, direction: int) -> EventKind:
    """In-place edge update on residues; returns the event kind (NoOp if inert)."""
    n = res.shape[0]
    if not 0 <= edge < n:
        raise IndexError(f"edge {edge} out of range for {n} edges")
    if direction == Direction.PLUS:
        if res[edge] != kappa - 1:
            return EventKind.NOOP
        ahead = (edge + 1) % n
        kind = classify_neighbor(direction, int(res[ahead]), kappa)
        res[edge] = 0
        res[ahead] = (res[ahead] - 1) % kappa
    else:
        if res[edge] != 1:
            return EventKind.NOOP
        ahead = (edge - 1) % n
        kind = classify_neighbor(direction, int(res[ahead]), kappa)
        res[edge] = 0
        res[ahead] = (res[ahead] + 1) % kappa
    return kind


def vertex_step(x: Coloring, edge: int, direction) -> Coloring:
    sites = x.sites.astype(np.int64)
    if vertex_apply(sites, x.kappa, edge, Direction.parse(direction)):
        return Coloring(x.kappa, sites)
    return x


def classify_event(e_before: EdgeConfig, edge: int, direction, kappa: int | None = None) -> EventKind:
    if kappa is not None and kappa != e_before.kappa:
        raise ValueError("kappa does not match the edge configuration")
    res = e_before.residues.astype(np.int64)
    return edge_apply(res, e_before.kappa, edge, Direction.parse(direction))


def edge_step(e: EdgeConfig, edge: int, direction) -> EdgeConfig:
    res = e.residues.astype(np.int64)
    if edge_apply(res, e.kappa, edge, Direction.parse(direction)) is EventKind.NOOP:
        return e
    return EdgeConfig(e.kappa, res)
