"""Self-checks: exhaustive small cases, per-realization identities, statistics.

Every check returns a :class:`Check` with the measured values next to the
criterion. ``run_suite("fast")`` runs the exact checks; ``"full"`` adds the
statistical experiments. Sizes default to the documented acceptance scale
and can be shrunk through keyword arguments (the unit tests do this).
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .analysis.collisions import collision_indicator_count, mass_transport_audit
from .analysis.density import DensityAccumulator
from .analysis.fits import fit_power_law, scan_decrement_time
from .analysis.matching import (brute_force_max_matching, is_valid_matching, running_sums,
                                water_fill_matching)
from .analysis.survival import r_presence, survival_maps
from .dynamics.ballistic import poisson_ballistic_state, run_ba
from .dynamics.cca import iterate_cca
from .dynamics.cps import EventLog, SimConfig, run_cps
from .dynamics.rules import Direction, EventKind, classify_neighbor, edge_apply, edge_step, vertex_step
from .dynamics.virtual import sample_virtual_pairs, virtual_pair_collision_time
from .lattice import Coloring, EdgeConfig, embed, new_uniform_coloring, reconstruct, reverse_edges
from .rng import RngStream, derive_seed

CCA_CONSTANT = math.sqrt(2 / (3 * math.pi))


@dataclass
class Check:
    name: str
    passed: bool
    criterion: str
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.criterion}"


def _timed(fn: Callable[..., Check]) -> Callable[..., Check]:
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        out.seconds = round(time.perf_counter() - t0, 3)
        return out
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ------------------------------------------------------------ replay / ledger

def replay_edges(e0: EdgeConfig, log: EventLog, disable_reflect: bool = False) -> tuple[np.ndarray, list[int]]:
    """Re-apply a log with the reference rules; returns final residues and kinds.

    ``disable_reflect`` turns Reflect firings into no-ops. It exists only so
    the ledger check can be shown to catch a broken rule.
    """
    res = e0.residues.astype(np.int64)
    n, kappa = res.size, e0.kappa
    kinds = []
    for edge, d in zip(log.edge.tolist(), log.direction.tolist()):
        if disable_reflect:
            src_ok = res[edge] == (kappa - 1 if d == Direction.PLUS else 1)
            ahead = (edge + 1) % n if d == Direction.PLUS else (edge - 1) % n
            if src_ok and classify_neighbor(d, int(res[ahead]), kappa) is EventKind.REFLECT:
                kinds.append(int(EventKind.NOOP))
                continue
        kinds.append(int(edge_apply(res, kappa, edge, d)))
    return res, kinds


def ledger_delta(kappa: int, counts) -> tuple[int, int]:
    """Change in (directed, blockade) counts implied by event-kind counts."""
    a = counts[EventKind.ANNIHILATE]
    if kappa == 3:
        return -2 * a - counts[EventKind.FLIP], 0
    bc, refl = counts[EventKind.BLOCKADE_CREATE], counts[EventKind.REFLECT]
    return -2 * a - 2 * bc, bc - refl


def _dir_blk(res: np.ndarray, kappa: int) -> tuple[int, int]:
    directed = int(np.count_nonzero((res == 1) | (res == kappa - 1)))
    blk = int(np.count_nonzero(res == 2)) if kappa == 4 else 0
    return directed, blk


def ledger_balances(e0: EdgeConfig, log: EventLog, disable_reflect: bool = False) -> bool:
    """Replayed count change equals the change implied by the logged kinds."""
    res, _ = replay_edges(e0, log, disable_reflect)
    d0, b0 = _dir_blk(e0.residues, e0.kappa)
    d1, b1 = _dir_blk(res, e0.kappa)
    counts = log.kind_counts()
    return (d1 - d0, b1 - b0) == ledger_delta(e0.kappa, counts)


# ---------------------------------------------------------------- fast checks

@_timed
def check_embedding_exhaustive(max_sites=None) -> Check:
    """Round trip, signed sum, color shift and reflection over all small colorings."""
    max_sites = max_sites or {3: 8, 4: 7}
    bad, total = 0, 0
    for kappa, n_max in max_sites.items():
        for n in range(2, n_max + 1):
            for sites in itertools.product(range(kappa), repeat=n):
                x = Coloring(kappa, np.array(sites))
                e = embed(x)
                ok = (reconstruct(int(sites[0]), e) == x
                      and e.signed_sum() % kappa == 0
                      and embed(x.shifted(1)) == e
                      and embed(x.reversed()) == reverse_edges(e))
                bad += not ok
                total += 1
    return Check("embedding_exhaustive", bad == 0, "embedding bijective, signed sum 0 mod kappa, "
                 "shift and reflection equivariant on all small colorings",
                 {"colorings": total, "failures": bad})


@_timed
def check_dual_step_exhaustive(max_sites: int = 6) -> Check:
    """embed(vertex step) == edge step for every coloring, edge and direction."""
    bad, total = 0, 0
    for kappa in (3, 4):
        for n in range(2, max_sites + 1):
            for sites in itertools.product(range(kappa), repeat=n):
                x = Coloring(kappa, np.array(sites))
                e = embed(x)
                for edge in range(n):
                    for d in (Direction.PLUS, Direction.MINUS):
                        total += 1
                        if embed(vertex_step(x, edge, d)) != edge_step(e, edge, d):
                            bad += 1
    return Check("dual_step_exhaustive", bad == 0, "vertex and edge single-clock updates commute with embed",
                 {"cases": total, "failures": bad})


@_timed
def check_matching_exhaustive(length: int = 12) -> Check:
    """Water-filling over every {R, Vacant, L} sequence of the given length."""
    invalid = formula = not_max = 0
    n_seq = 0
    for seq in itertools.product((-1, 0, 1), repeat=length):
        xi = np.array(seq, dtype=np.int64)
        m = water_fill_matching(xi)
        n_seq += 1
        if not is_valid_matching(xi, m):
            invalid += 1
        if 2 * len(m) != running_sums(xi).matched_particles():
            formula += 1
        if len(m) != brute_force_max_matching(xi):
            not_max += 1
    ok = invalid == formula == not_max == 0
    return Check("matching_exhaustive", ok, f"all 3^{length} sequences: valid, size formula exact, "
                 "equal to brute-force maximum",
                 {"sequences": n_seq, "invalid": invalid, "formula_mismatch": formula, "not_maximum": not_max})


@_timed
def check_dual_engines(seeds: int = 1000, n_sites: int = 64, t_max: float = 20.0) -> Check:
    """Vertex and Edge engines event by event, reference replay, exact ledgers."""
    times = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0]
    times = [t for t in times if t <= t_max]
    stats = {"runs": 0, "events": 0, "engine_mismatch": 0, "replay_mismatch": 0,
             "ledger_mismatch": 0, "signed_sum_violations": 0, "audit_mismatch": 0}
    for kappa in (3, 4):
        for scheduler in ("Naive", "RejectionFree"):
            for k in range(seeds):
                seed = derive_seed(kappa * 7919 + (scheduler == "Naive"), k)
                trajs = {}
                for engine in ("Vertex", "Edge"):
                    cfg = SimConfig(kappa, n_sites, seed, t_max, times, engine, scheduler, log_events=True)
                    trajs[engine] = run_cps(cfg)
                v, e = trajs["Vertex"], trajs["Edge"]
                stats["runs"] += 1
                stats["events"] += len(v.events)
                same = (np.array_equal(v.events.time, e.events.time)
                        and np.array_equal(v.events.edge, e.events.edge)
                        and np.array_equal(v.events.direction, e.events.direction)
                        and np.array_equal(v.events.kind, e.events.kind)
                        and all(a.coloring == b.coloring for a, b in zip(v.snapshots, e.snapshots)))
                stats["engine_mismatch"] += not same
                e0 = v.snapshots[0].edges
                res, kinds = replay_edges(e0, e.events)
                if kinds != e.events.kind.tolist() or not np.array_equal(res, e.final.edges.residues):
                    stats["replay_mismatch"] += 1
                for i in range(1, len(times)):
                    w = e.events.window(times[i - 1], times[i])
                    before, after = e.snapshots[i - 1].edges, e.snapshots[i].edges
                    delta = tuple(np.subtract(_dir_blk(after.residues, kappa), _dir_blk(before.residues, kappa)))
                    if delta != ledger_delta(kappa, w.kind_counts()):
                        stats["ledger_mismatch"] += 1
                for s in e.snapshots:
                    if s.edges.signed_sum() % kappa:
                        stats["signed_sum_violations"] += 1
                if kappa == 4:
                    rep = mass_transport_audit(e.events, e0, 0.0)
                    if not (rep.pairing_exact and rep.removals_equal_reflects):
                        stats["audit_mismatch"] += 1
    ok = all(v == 0 for key, v in stats.items() if key not in ("runs", "events"))
    return Check("dual_engines_and_ledgers", ok, "engines agree event by event; replay, ledgers and "
                 "signed sums exact", stats)


@_timed
def check_ledger_mutation(seeds: int = 50, n_sites: int = 64, t_max: float = 20.0) -> Check:
    """With Reflect disabled in the replay, the ledger must stop balancing."""
    caught = runs = 0
    for k in range(seeds):
        cfg = SimConfig(4, n_sites, derive_seed(4242, k), t_max, (0.0,), log_events=True)
        traj = run_cps(cfg)
        if not traj.events.kind_counts()[EventKind.REFLECT]:
            continue
        runs += 1
        e0 = traj.snapshots[0].edges
        if ledger_balances(e0, traj.events) and not ledger_balances(e0, traj.events, disable_reflect=True):
            caught += 1
    return Check("ledger_catches_reflect_mutation", runs > 0 and caught == runs,
                 "disabling Reflect breaks the conservation ledger in every run with a Reflect",
                 {"runs_with_reflect": runs, "caught": caught})


@_timed
def check_matching_collisions(runs: int = 100, n_sites: int = 512, interval: int = 64,
                              t_max: float = 100.0) -> Check:
    """Collisions inside an interval by the virtual-pair time are at least |M|."""
    violations = intervals = undecided = 0
    slack = []
    for kappa in (3, 4):
        for k in range(runs):
            cfg = SimConfig(kappa, n_sites, derive_seed(kappa * 104729, k), t_max, (0.0,),
                            scheduler="Naive", log_events=True)
            traj = run_cps(cfg)
            e0 = traj.snapshots[0].edges
            for a in range(0, n_sites, interval):
                b = a + interval - 1
                tau = virtual_pair_collision_time(traj.events, 0.0, a, b)
                if not math.isfinite(tau):
                    undecided += 1
                    continue
                xi = np.roll(e0.signed, -a)
                m = len(water_fill_matching(xi, interval))
                col = collision_indicator_count(traj.events, e0, 0.0, tau, range(a, b + 1))
                intervals += 1
                violations += col < m
                slack.append(col - m)
    return Check("matching_bounds_collisions", violations == 0 and intervals > 0,
                 f"{2 * runs} runs on N={n_sites}, intervals of length {interval}: zero violations",
                 {"intervals": intervals, "violations": violations, "undecided": undecided,
                  "min_slack": int(min(slack)) if slack else None})


@_timed
def check_survival(seeds: int = 100, n_sites: int = 2000, t_max: int = 500) -> Check:
    """Running-sum survival criterion equals simulated r presence, every edge and t."""
    mismatched_cells = 0
    for k in range(seeds):
        y0 = new_uniform_coloring(n_sites, 3, RngStream(derive_seed(31337, k)))
        for t, (pred, row) in enumerate(zip(survival_maps(y0, t_max), iterate_cca(y0, t_max))):
            if t == 0:
                continue
            mismatched_cells += int(np.count_nonzero(pred != r_presence(row)))
    return Check("cca_survival_criterion", mismatched_cells == 0,
                 f"{seeds} seeds, N={n_sites}, t=1..{t_max}: exact agreement",
                 {"seeds": seeds, "mismatched_cells": mismatched_cells})


# ----------------------------------------------------------------- full checks

@_timed
def check_initial_densities(replicas: int = 20, n_sites: int = 100_000) -> Check:
    out = {}
    ok = True
    for kappa in (3, 4):
        acc = DensityAccumulator(n_sites)
        for k in range(replicas):
            x = new_uniform_coloring(n_sites, kappa, RngStream(derive_seed(kappa, k)))
            acc.add_edges(0.0, x)
        st = acc.stats(0.0)
        if kappa == 3:
            z = (st["r"] - 2 / 3) / st["se_r"]
            out["k3_r0"], out["k3_z"] = st["r"], z
            ok &= abs(z) <= 3
        else:
            zp, zq = (st["p"] - 0.5) / st["se_p"], (st["q"] - 0.25) / st["se_q"]
            out.update(k4_p0=st["p"], k4_z_p=zp, k4_q0=st["q"], k4_z_q=zq)
            ok &= abs(zp) <= 3 and abs(zq) <= 3
    return Check("initial_densities", bool(ok), "r(0)=2/3 (kappa 3), p(0)=1/2, q(0)=1/4 (kappa 4) within 3 s.e.",
                 out)


@_timed
def check_cca_rate(replicas: int = 5, n_sites: int = 1_000_000, t: int = 400) -> Check:
    values = []
    for k in range(replicas):
        y0 = new_uniform_coloring(n_sites, 3, RngStream(derive_seed(2718, k)))
        row = None
        for row in iterate_cca(y0, t):
            pass
        differ = float(np.mean(row != np.roll(row, -1)))
        values.append(differ * math.sqrt(t))
    mean = float(np.mean(values))
    rel = abs(mean - CCA_CONSTANT) / CCA_CONSTANT
    return Check("cca_clustering_constant", rel <= 0.10,
                 f"P(differ) * sqrt(t) at t={t} within 10% of sqrt(2/(3 pi))",
                 {"measured": mean, "target": CCA_CONSTANT, "relative_error": rel, "per_replica": values})


@lru_cache(maxsize=8)
def _cps_trace(kappa, n_sites, replicas, times, engine=None, scheduler="RejectionFree", salt=0):
    """Density accumulator plus exact per-realization monotonicity and ledger tallies.

    Cached so that several checks can share the same (expensive) runs.
    """
    engine = engine or ("Edge" if kappa in (3, 4) else "Vertex")
    acc = DensityAccumulator(n_sites)
    monotone_bad = ledger_bad = 0
    for k in range(replicas):
        cfg = SimConfig(kappa, n_sites, derive_seed(1000 * kappa + salt, k), max(times), times, engine, scheduler)
        traj = run_cps(cfg)
        prev_counts, prev = None, None
        for s, counts in zip(traj.snapshots, traj.kind_counts):
            acc.add_edges(s.time, s.coloring)
            if kappa in (3, 4):
                d, b = _dir_blk(s.edges.residues, kappa)
                if prev is not None:
                    monotone_bad += d + b > prev[0] + prev[1]
                    delta = ledger_delta(kappa, {kind: int(counts[kind] - prev_counts[kind]) for kind in EventKind})
                    ledger_bad += (d - prev[0], b - prev[1]) != delta
                prev, prev_counts = (d, b), counts
    return acc, monotone_bad, ledger_bad


CPS_TIMES = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0)


@_timed
def check_directed_vs_blockades(replicas: int = 20, n_sites: int = 100_000) -> Check:
    """kappa 4: p(t) + 3 s.e. >= q(t) at every sampled t up to 500."""
    acc, _, _ = _cps_trace(4, n_sites, replicas, CPS_TIMES)
    rows = []
    for t in CPS_TIMES[:-1]:
        st = acc.stats(t)
        rows.append({"t": t, "p": st["p"], "q": st["q"], "se_p_minus_q": st["se_p_minus_q"],
                     "ok": st["p"] + 3 * st["se_p_minus_q"] >= st["q"]})
    failing = [r["t"] for r in rows if not r["ok"]]
    return Check("directed_at_least_blockades", not failing, "kappa 4: p(t) + 3 s.e. >= q(t) for "
                 "t in {0,1,2,5,10,20,50,100,200,500}", {"rows": rows, "failing_times": failing})


@_timed
def check_density_decay(replicas: int = 20, n_sites: int = 100_000, fixation_replicas: int = 5) -> Check:
    """Monotone particle count, strict decay of r, and the kappa 5 fixation contrast."""
    out: dict = {}
    ok = True
    traces = {}
    for kappa in (3, 4):
        acc, mono, ledger = _cps_trace(kappa, n_sites, replicas, CPS_TIMES)
        traces[kappa] = acc
        out[f"k{kappa}_monotone_violations"] = mono
        out[f"k{kappa}_ledger_mismatches"] = ledger
        ok &= mono == 0 and ledger == 0
        z = []
        for t0, t1 in ((1.0, 10.0), (10.0, 100.0), (100.0, 1000.0)):
            a, b = acc.stats(t0), acc.stats(t1)
            z.append((a["r"] - b["r"]) / math.hypot(a["se_r"], b["se_r"]))
        out[f"k{kappa}_decrease_z"] = z
        ok &= all(v > 3 for v in z)
        out[f"k{kappa}_r"] = {t: acc.stats(t)["r"] for t in CPS_TIMES}
        # reported, not asserted
        out[f"k{kappa}_exploratory_alpha"] = fit_power_law(acc.trace(), (10.0, 1000.0)).alpha
        tr = acc.trace()
        out[f"k{kappa}_decrement_times"] = {t0: scan_decrement_time(tr.t, tr.column("p"), tr.r, t0)
                                            for t0 in (0.0, 1.0, 10.0, 100.0)}
    ratio3 = traces[3].stats(1000.0)["r"] / traces[3].stats(200.0)["r"]
    acc5, _, _ = _cps_trace(5, n_sites, fixation_replicas, (200.0, 1000.0))
    ratio5 = acc5.stats(1000.0)["r"] / acc5.stats(200.0)["r"]
    out.update(k3_ratio_1000_200=ratio3, k5_ratio_1000_200=ratio5)
    ok &= ratio3 < 0.9 and 0.9 <= ratio5 <= 1.0
    return Check("density_decay", bool(ok), "particle count non-increasing per realization; r strictly "
                 "decreasing over t in {1,10,100,1000}; r(1000)/r(200) in [0.9,1] for kappa 5, < 0.9 for kappa 3",
                 out)


@_timed
def check_virtual_pair(gap: int = 100, samples: int = 10_000) -> Check:
    x = sample_virtual_pairs(gap, samples, RngStream(derive_seed(1618, 0)))
    mean, var = float(x.mean()), float(x.var(ddof=1))
    target_mean, target_var = gap / 2, gap / 4
    se = math.sqrt(target_var / samples)
    ok = abs(mean - target_mean) <= 3 * se and abs(var - target_var) <= 0.1 * target_var
    return Check("virtual_pair_time", ok, f"gap {gap}: mean within 3 s.e. of {target_mean}, "
                 f"variance within 10% of {target_var}", {"mean": mean, "variance": var, "se_mean": se})


@_timed
def check_scheduler_equivalence(replicas: int = 200, n_sites: int = 10_000, t: float = 50.0) -> Check:
    stats = {}
    for sched in ("Naive", "RejectionFree"):
        acc, _, _ = _cps_trace(3, n_sites, replicas, (t,), scheduler=sched, salt=17 if sched == "Naive" else 23)
        stats[sched] = acc.stats(t)
    a, b = stats["Naive"], stats["RejectionFree"]
    z = (a["r"] - b["r"]) / math.hypot(a["se_r"], b["se_r"])
    return Check("scheduler_equivalence", abs(z) < 3, f"mean r({t:g}) differs by < 3 combined s.e.",
                 {"r_naive": a["r"], "r_rejection_free": b["r"], "z": z})


@_timed
def check_ba_exponent(n: int = 100_000, t_lo: float = 10.0, t_hi: float = 300.0, points: int = 16) -> Check:
    state = poisson_ballistic_state(n, [-1, 1], RngStream(derive_seed(577, 0)))
    res = run_ba(state, t_hi)
    # particles within unit speed * t_hi of either end can escape collisions; drop them
    x0 = state.positions
    bulk = (x0 > x0[0] + t_hi) & (x0 < x0[-1] - t_hi)
    ts = np.geomspace(t_lo, t_hi, points)
    dens = np.array([np.count_nonzero(bulk & (res.death_time > t)) / np.count_nonzero(bulk) for t in ts])
    fit = fit_power_law(ts, r=dens)
    return Check("ballistic_exponent", 0.4 <= fit.alpha <= 0.6, f"alpha on [{t_lo:g}, {t_hi:g}] in [0.4, 0.6]",
                 {"alpha": fit.alpha, "c": fit.c, "bulk_particles": int(bulk.sum())})


FAST = (check_embedding_exhaustive, check_dual_step_exhaustive, check_matching_exhaustive,
        check_dual_engines, check_ledger_mutation, check_matching_collisions, check_survival)
FULL = FAST + (check_initial_densities, check_cca_rate, check_directed_vs_blockades, check_density_decay, check_virtual_pair,
               check_scheduler_equivalence, check_ba_exponent)


def run_suite(suite: str = "fast", echo=print) -> tuple[bool, dict]:
    if suite not in ("fast", "full"):
        raise ValueError("suite must be 'fast' or 'full'")
    checks = []
    for fn in FAST if suite == "fast" else FULL:
        c = fn()
        echo(c.line())
        checks.append(c)
    passed = all(c.passed for c in checks)
    return passed, {"suite": suite, "passed": passed, "checks": [asdict(c) for c in checks]}
