"""Continuous-time CPS, the synchronous CCA, ballistic annihilation, virtual particles."""
from .ballistic import BallisticState, run_ba
from .cca import cca_update, iterate_cca, run_cca
from .cps import Engine, EngineError, Scheduler, SimConfig, run_cps
from .rules import Direction, EventKind, classify_event, edge_step, vertex_step

__all__ = [
    "BallisticState", "Direction", "Engine", "EngineError", "EventKind", "Scheduler", "SimConfig",
    "cca_update", "classify_event", "edge_step", "iterate_cca", "run_ba", "run_cca", "run_cps", "vertex_step",
]
