"""On-disk formats.

* snapshots: JSONL, one ``{"t", "kappa", "sites", "edges"}`` object per line
* event logs: CSV ``time,edge,direction,kind`` (direction ``+``/``-``,
  kind as in EventKind labels)
* density traces: CSV ``t,p,q,r,n_edges,n_replicas,se_r``
* ballistic collisions: CSV ``time,position,left,right``
* rate fits and audit reports: JSON

Floats are written with ``repr`` so every file parses back bit-exactly.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .analysis.density import DensityRow, DensityTrace
from .analysis.fits import RateFit
from .dynamics.ballistic import Collision
from .dynamics.cps import EventLog, Snapshot
from .dynamics.rules import Direction, EventKind
from .lattice import Coloring, EdgeConfig

EVENT_COLUMNS = ["time", "edge", "direction", "kind"]
DENSITY_COLUMNS = ["t", "p", "q", "r", "n_edges", "n_replicas", "se_r"]
COLLISION_COLUMNS = ["time", "position", "left", "right"]


def _f(x: float) -> str:
    return repr(float(x))


def snapshot_to_json(s: Snapshot) -> dict:
    obj = {"t": float(s.time), "kappa": s.coloring.kappa, "sites": s.coloring.sites.tolist()}
    if s.edges is not None:
        obj["edges"] = list(s.edges.symbols())
    return obj


def snapshot_from_json(obj: dict) -> Snapshot:
    x = Coloring(int(obj["kappa"]), np.asarray(obj["sites"], dtype=np.int64))
    e = EdgeConfig.from_kinds(obj["edges"], x.kappa) if "edges" in obj else None
    return Snapshot(float(obj["t"]), x, e)


def write_snapshots_jsonl(path, snapshots: Iterable[Snapshot]) -> None:
    with open(path, "w") as fh:
        for s in snapshots:
            fh.write(json.dumps(snapshot_to_json(s)) + "\n")


def read_snapshots_jsonl(path) -> list[Snapshot]:
    with open(path) as fh:
        return [snapshot_from_json(json.loads(line)) for line in fh if line.strip()]


def write_events_csv(path, log: EventLog) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_COLUMNS)
        for t, e, d, k in zip(log.time.tolist(), log.edge.tolist(), log.direction.tolist(), log.kind.tolist()):
            w.writerow([_f(t), e, Direction(d).symbol, EventKind(k).label])


def read_events_csv(path, t_start: float = 0.0, t_end: float | None = None, n_sites: int = 0,
                    kappa: int = 0, all_clocks: bool = False) -> EventLog:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and list(rows[0]) != EVENT_COLUMNS:
        raise ValueError(f"unexpected event columns {list(rows[0])}")
    time = np.array([float(r["time"]) for r in rows], dtype=np.float64)
    return EventLog(
        time,
        np.array([int(r["edge"]) for r in rows], dtype=np.int32),
        np.array([int(Direction.parse(r["direction"])) for r in rows], dtype=np.int8),
        np.array([int(EventKind.from_label(r["kind"])) for r in rows], dtype=np.int8),
        float(t_start),
        float(time[-1]) if t_end is None and rows else float(t_end if t_end is not None else t_start),
        n_sites, kappa, all_clocks,
    )


def write_density_csv(path, trace: DensityTrace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DENSITY_COLUMNS)
        for row in trace.rows:
            w.writerow([_f(row.t), _f(row.p), _f(row.q), _f(row.r), row.n_edges, row.n_replicas, _f(row.se_r)])


def read_density_csv(path) -> DensityTrace:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != DENSITY_COLUMNS:
            raise ValueError(f"unexpected density columns {reader.fieldnames}")
        return DensityTrace([
            DensityRow(float(r["t"]), float(r["p"]), float(r["q"]), float(r["r"]),
                       int(r["n_edges"]), int(r["n_replicas"]), float(r["se_r"]))
            for r in reader
        ])


def write_collisions_csv(path, collisions: Iterable[Collision]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLLISION_COLUMNS)
        for c in collisions:
            w.writerow([_f(c.time), _f(c.position), c.left, c.right])


def read_collisions_csv(path) -> list[Collision]:
    with open(path, newline="") as fh:
        return [Collision(float(r["time"]), float(r["position"]), int(r["left"]), int(r["right"]))
                for r in csv.DictReader(fh)]


def rate_fit_from_json(obj: dict) -> RateFit:
    return RateFit(float(obj["c"]), float(obj["alpha"]), float(obj["residual"]),
                   tuple(obj["window"]), int(obj["n_points"]))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
