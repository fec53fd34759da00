"""Exactly reproducible simulations of cyclic particle systems on a ring.

The 3- and 4-color systems are simulated either on site colors or on the
equivalent edge-particle configuration; the analysis helpers work on event
logs and snapshots produced by :func:`run_cps`.
"""
from .dynamics.cps import EventLog, SimConfig, Snapshot, Trajectory, run_cps
from .lattice import Coloring, EdgeConfig, EdgeKind, embed, reconstruct
from .rng import RngStream, derive_seed

__version__ = "0.1.0"

__all__ = [
    "Coloring", "EdgeConfig", "EdgeKind", "EventLog", "RngStream", "SimConfig", "Snapshot",
    "Trajectory", "derive_seed", "embed", "reconstruct", "run_cps",
]
