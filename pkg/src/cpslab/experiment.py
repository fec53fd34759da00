"""Experiment specs and replica orchestration.

A spec is a JSON object. Replica ``k`` of an experiment with seed ``s``
runs with seed ``derive_seed(s, k)`` (see :mod:`cpslab.rng`), so results do
not depend on how many replicas run at once. Replicas execute on a thread
pool capped by the ``CPSLAB_THREADS`` environment variable; the numba
kernels release the GIL. Aggregation happens after all replicas finish, in
replica order.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import io
from .analysis.clustering import clustering_probe
from .analysis.collisions import mass_transport_audit
from .analysis.density import DensityAccumulator
from .analysis.fits import fit_power_law, geometric_times
from .analysis.matching import running_sums, water_fill_matching
from .analysis.survival import r_presence, survival_maps
from .dynamics.ballistic import poisson_ballistic_state, run_ba
from .dynamics.cca import iterate_cca
from .dynamics.cps import Engine, Scheduler, SimConfig, Snapshot, run_cps
from .lattice import Coloring, EMBED_KAPPAS, embed, new_uniform_coloring
from .render import render_spacetime, write_ppm
from .rng import RngStream, derive_seed

MODELS = ("CPS", "CCA", "BA")
ANALYSES = ("densities", "matching", "audit", "rate_fit", "survival", "clustering")

_KEYS = {
    "model", "kappa", "n_sites", "seed", "t_max", "snapshot_times", "engine", "scheduler",
    "log_events", "replicas", "output_dir", "analyses", "raster", "save_snapshots", "velocities",
}
_REQUIRED = ("n_sites", "seed", "t_max")


class SpecError(ValueError):
    """Base class for spec problems."""


class MalformedSpec(SpecError):
    pass


class MissingField(SpecError):
    pass


class InconsistentSpec(SpecError):
    pass


class ReplicaError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"replica {index} failed: {cause}")
        self.index = index


@dataclass
class Analysis:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentSpec:
    model: str
    n_sites: int
    seed: int
    t_max: float
    kappa: int = 3
    snapshot_times: list[float] = field(default_factory=list)
    engine: str = "Edge"
    scheduler: str = "RejectionFree"
    log_events: bool = False
    replicas: int = 1
    output_dir: str = "out"
    analyses: list[Analysis] = field(default_factory=list)
    raster: bool = False
    save_snapshots: bool = False
    velocities: list[int] = field(default_factory=lambda: [-1, 1])

    def has(self, name: str) -> bool:
        return any(a.name == name for a in self.analyses)

    def params(self, name: str) -> dict:
        for a in self.analyses:
            if a.name == name:
                return a.params
        return {}

    def sim_config(self, replica: int) -> SimConfig:
        return SimConfig(kappa=self.kappa, n_sites=self.n_sites, seed=derive_seed(self.seed, replica),
                         t_max=self.t_max, snapshot_times=self.snapshot_times, engine=self.engine,
                         scheduler=self.scheduler, log_events=self.log_events)


def _parse_analyses(raw) -> list[Analysis]:
    if not isinstance(raw, list):
        raise MalformedSpec("'analyses' must be a list")
    out = []
    for item in raw:
        if isinstance(item, str):
            a = Analysis(item)
        elif isinstance(item, dict) and isinstance(item.get("name"), str):
            a = Analysis(item["name"], {k: v for k, v in item.items() if k != "name"})
        else:
            raise MalformedSpec(f"analysis entries must be names or objects with a 'name': {item!r}")
        if a.name not in ANALYSES:
            raise MalformedSpec(f"unknown analysis {a.name!r}; expected one of {ANALYSES}")
        out.append(a)
    return out


def _check_consistency(model: str, obj: dict, analyses: list[Analysis]) -> None:
    kappa = obj.get("kappa")
    names = {a.name for a in analyses}
    if "audit" in names:
        if model != "CPS" or kappa != 4:
            raise InconsistentSpec("analysis 'audit' requires model CPS with kappa 4")
        if not obj.get("log_events", False):
            raise InconsistentSpec("analysis 'audit' requires log_events = true")
    if "survival" in names and (model != "CCA" or kappa != 3):
        raise InconsistentSpec("analysis 'survival' requires model CCA with kappa 3")
    if "matching" in names and (model == "BA" or kappa not in EMBED_KAPPAS):
        raise InconsistentSpec("analysis 'matching' requires CPS or CCA with kappa in {3, 4}")
    if "clustering" in names and model == "BA":
        raise InconsistentSpec("analysis 'clustering' requires a coloring model (CPS or CCA)")
    if model == "BA" and ("engine" in obj or "scheduler" in obj):
        raise InconsistentSpec("engine/scheduler apply to CPS only")
    if model != "BA" and "velocities" in obj:
        raise InconsistentSpec("'velocities' applies to BA only")
    if model != "CPS" and obj.get("log_events"):
        if model != "BA":
            raise InconsistentSpec("log_events applies to CPS and BA only")


def parse_spec(text: str) -> ExperimentSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedSpec(f"spec is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedSpec("spec must be a JSON object")
    unknown = sorted(set(obj) - _KEYS)
    if unknown:
        raise MalformedSpec(f"unknown keys: {', '.join(unknown)}")
    model = obj.get("model")
    if model is None:
        raise MissingField("missing required field 'model'")
    if model not in MODELS:
        raise MalformedSpec(f"model must be one of {MODELS}, got {model!r}")
    analyses = _parse_analyses(obj.get("analyses", []))
    _check_consistency(model, obj, analyses)
    for key in _REQUIRED:
        if key not in obj:
            raise MissingField(f"missing required field {key!r}")
    if model != "BA" and "kappa" not in obj:
        raise MissingField("missing required field 'kappa'")

    kappa = int(obj.get("kappa", 3))
    n_sites, seed, t_max = int(obj["n_sites"]), int(obj["seed"]), float(obj["t_max"])
    replicas = int(obj.get("replicas", 1))
    if replicas < 1:
        raise MalformedSpec("replicas must be >= 1")
    if n_sites < 2:
        raise MalformedSpec("n_sites must be >= 2")
    if t_max < 0:
        raise MalformedSpec("t_max must be non-negative")
    if model == "CCA" and t_max != int(t_max):
        raise MalformedSpec("CCA t_max counts steps and must be an integer")
    times = obj.get("snapshot_times")
    if times is None:
        times = geometric_times(t_max)
    times = sorted(float(t) for t in times)
    if any(t < 0 or t > t_max for t in times):
        raise MalformedSpec("snapshot times must lie in [0, t_max]")
    if model == "CCA" and any(t != int(t) for t in times):
        raise MalformedSpec("CCA snapshot times must be integers")
    engine = obj.get("engine", "Edge" if kappa in EMBED_KAPPAS else "Vertex")
    scheduler = obj.get("scheduler", "RejectionFree")
    try:
        Engine(engine)
        Scheduler(scheduler)
    except ValueError as exc:
        raise MalformedSpec(str(exc)) from None
    if model == "CPS" and engine == "Edge" and kappa not in EMBED_KAPPAS:
        raise InconsistentSpec("the Edge engine needs kappa in {3, 4}")
    names = {a.name for a in analyses}
    if "rate_fit" in names and "densities" not in names:
        analyses.insert(0, Analysis("densities"))
    if "survival" in names:
        t_surv = int(next(a for a in analyses if a.name == "survival").params.get("t", 1))
        if n_sites <= 2 * t_surv + 2 or t_surv > t_max:
            raise InconsistentSpec("survival window must fit in the ring (n_sites > 2t+2) and t <= t_max")
    velocities = [int(v) for v in obj.get("velocities", [-1, 1])]
    if not velocities or any(v not in (-1, 0, 1) for v in velocities):
        raise MalformedSpec("velocities must be a non-empty list over {-1, 0, 1}")
    return ExperimentSpec(
        model=model, n_sites=n_sites, seed=seed, t_max=t_max, kappa=kappa, snapshot_times=times,
        engine=engine, scheduler=scheduler, log_events=bool(obj.get("log_events", False)),
        replicas=replicas, output_dir=str(obj.get("output_dir", "out")), analyses=analyses,
        raster=bool(obj.get("raster", False)), save_snapshots=bool(obj.get("save_snapshots", False)),
        velocities=velocities,
    )


def _thread_cap() -> int:
    env = os.environ.get("CPSLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SpecError(f"CPSLAB_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


@dataclass
class ReplicaResult:
    index: int
    densities: DensityAccumulator
    snapshots: list[Snapshot]
    events: Any = None
    extra: dict = field(default_factory=dict)


def _run_cps_replica(spec: ExperimentSpec, k: int) -> ReplicaResult:
    cfg = spec.sim_config(k)
    traj = run_cps(cfg)
    acc = DensityAccumulator(spec.n_sites)
    for s in traj.snapshots:
        acc.add_edges(s.time, s.coloring)
    extra = {}
    if spec.has("audit"):
        t_a = float(spec.params("audit").get("t", 0.0))
        e_start = _edges_at(traj, t_a)
        extra["audit"] = mass_transport_audit(traj.events, e_start, t_a).to_json()
    return ReplicaResult(k, acc, traj.snapshots, traj.events, extra)


def _edges_at(traj, t):
    for s in traj.snapshots:
        if s.time == t:
            return s.edges
    raise InconsistentSpec(f"audit start time {t} must be one of the snapshot times")


def _run_cca_replica(spec: ExperimentSpec, k: int) -> ReplicaResult:
    y0 = new_uniform_coloring(spec.n_sites, spec.kappa, RngStream(derive_seed(spec.seed, k)))
    want = {int(t) for t in spec.snapshot_times}
    acc = DensityAccumulator(spec.n_sites)
    snaps = []
    extra = {}
    surv_t = int(spec.params("survival").get("t", 1)) if spec.has("survival") else None
    for step, row in enumerate(iterate_cca(y0, int(spec.t_max))):
        if step in want:
            x = Coloring(spec.kappa, row)
            acc.add_edges(float(step), x)
            snaps.append(Snapshot(float(step), x, embed(x) if spec.kappa in EMBED_KAPPAS else None))
        if surv_t is not None and step == surv_t:
            predicted = list(survival_maps(y0, surv_t))[-1]
            observed = r_presence(row)
            extra["survival"] = {"t": surv_t, "edges": spec.n_sites,
                                 "mismatches": int(np.count_nonzero(predicted != observed)),
                                 "r_present": int(observed.sum())}
    return ReplicaResult(k, acc, snaps, None, extra)


def _run_ba_replica(spec: ExperimentSpec, k: int) -> ReplicaResult:
    state = poisson_ballistic_state(spec.n_sites, spec.velocities, RngStream(derive_seed(spec.seed, k)))
    res = run_ba(state, spec.t_max)
    acc = DensityAccumulator(spec.n_sites)
    moving = state.velocities != 0
    for t in spec.snapshot_times:
        alive = res.death_time > t
        acc.add(t, int(np.count_nonzero(alive & moving)), int(np.count_nonzero(alive & ~moving)))
    return ReplicaResult(k, acc, [], res.collisions, {"collisions": len(res.collisions)})


_RUNNERS = {"CPS": _run_cps_replica, "CCA": _run_cca_replica, "BA": _run_ba_replica}


def run_replicas(spec: ExperimentSpec) -> list[ReplicaResult]:
    runner = _RUNNERS[spec.model]

    def job(k):
        try:
            return runner(spec, k)
        except Exception as exc:  # re-raised with the replica index
            raise ReplicaError(k, exc) from exc

    workers = min(spec.replicas, _thread_cap())
    if workers == 1:
        return [job(k) for k in range(spec.replicas)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, range(spec.replicas)))


def _matching_report(spec: ExperimentSpec, results: list[ReplicaResult]) -> list[dict]:
    params = spec.params("matching")
    cut = int(params.get("cut", 0))
    length = int(params.get("length", spec.n_sites))
    out = []
    for res in results:
        snap = res.snapshots[-1]
        xi = np.roll(snap.edges.signed, -cut)
        m = water_fill_matching(xi, length)
        prof = running_sums(xi, length)
        out.append({"replica": res.index, "t": snap.time, "cut": cut, "length": length,
                    "pairs": len(m), "matched_particles": 2 * len(m),
                    "formula": prof.matched_particles()})
    return out


def _clustering_report(spec: ExperimentSpec, results: list[ReplicaResult]) -> list[dict]:
    params = spec.params("clustering")
    x, y = int(params.get("x", 0)), int(params.get("y", 1))
    out = []
    for i, t in enumerate(spec.snapshot_times):
        est = clustering_probe([r.snapshots[i].coloring for r in results], x, y)
        out.append({"t": t, "x": x, "y": y, "p_same": est.p_same, "se": est.se,
                    "n_replicas": est.n_replicas, "union_bound": est.union_bound})
    return out


def run_experiment(spec: ExperimentSpec, out_dir=None, echo=print) -> tuple[int, dict]:
    """Run all replicas and write artifacts; returns (exit status, summary)."""
    out = Path(out_dir or spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_replicas(spec)

    acc = results[0].densities
    for r in results[1:]:
        acc = acc.merge(r.densities)
    trace = acc.trace()
    io.write_density_csv(out / "densities.csv", trace)

    for r in results:
        if r.events is None:
            continue
        name = "events.csv" if r.index == 0 else f"events_{r.index:03d}.csv"
        if spec.model == "BA":
            io.write_collisions_csv(out / name, r.events)
        else:
            io.write_events_csv(out / name, r.events)

    summary: dict[str, Any] = {"model": spec.model, "replicas": spec.replicas, "seed": spec.seed}
    fits: dict[str, Any] = {}
    status = 0
    if spec.has("rate_fit"):
        window = spec.params("rate_fit").get("window")
        positive = [row for row in trace.rows if row.t > 0 and row.r > 0]
        if window is None and positive:
            window = [positive[0].t, positive[-1].t]
        try:
            fits["rate_fit"] = fit_power_law(trace, tuple(window)).to_json()
        except (ValueError, TypeError) as exc:
            fits["rate_fit"] = {"error": str(exc)}
            status = 1
    io.write_json(out / "fits.json", fits)

    report: dict[str, Any] = {}
    if spec.has("audit"):
        report["audit"] = [r.extra["audit"] for r in results]
    if spec.has("survival"):
        report["survival"] = [r.extra["survival"] for r in results]
        if any(s["mismatches"] for s in report["survival"]):
            status = 1
    if spec.has("matching"):
        report["matching"] = _matching_report(spec, results)
        if any(m["matched_particles"] != m["formula"] for m in report["matching"]):
            status = 1
    if spec.has("clustering"):
        report["clustering"] = _clustering_report(spec, results)
    if spec.model == "BA":
        report["collisions"] = [r.extra["collisions"] for r in results]
    if report:
        io.write_json(out / "report.json", report)

    if spec.save_snapshots and results[0].snapshots:
        io.write_snapshots_jsonl(out / "snapshots.jsonl", results[0].snapshots)
    if spec.raster and results[0].snapshots:
        write_ppm(out / "raster.ppm", render_spacetime(results[0].snapshots))

    echo(f"{'t':>10} {'p':>10} {'q':>10} {'r':>10} {'se_r':>10}")
    for row in trace.rows:
        echo(f"{row.t:>10g} {row.p:>10.5f} {row.q:>10.5f} {row.r:>10.5f} {row.se_r:>10.2g}")
    if "rate_fit" in fits and "alpha" in fits["rate_fit"]:
        f = fits["rate_fit"]
        echo(f"rate fit: r ~ {f['c']:.4g} t^-{f['alpha']:.4f} on {f['window']}")
    summary["fits"] = fits
    summary["report"] = report
    summary["n_rows"] = len(trace)
    return status, summary
