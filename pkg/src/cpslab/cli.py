"""Command-line entry point: ``cpslab <subcommand> ...``.

Exit status: 0 on success, 1 when a check or analysis fails, 2 on bad
input (unreadable or invalid spec, bad arguments).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .analysis.fits import fit_power_law
from .analysis.matching import running_sums, water_fill_matching
from .experiment import ReplicaError, SpecError, parse_spec, run_experiment
from .lattice import as_signed
from .render import render_spacetime, write_ppm
from .verify import run_suite

log = logging.getLogger("cpslab")


def _load_spec(args, model: str):
    obj = {}
    if args.spec:
        try:
            obj = json.loads(Path(args.spec).read_text())
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec is not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise SpecError("spec must be a JSON object")
    if obj.setdefault("model", model) != model:
        raise SpecError(f"'{args.command}' runs {model} experiments, spec says {obj['model']!r}")
    overrides = {"seed": args.seed, "replicas": args.replicas, "output_dir": args.out,
                 "n_sites": args.n_sites, "t_max": args.t_max}
    if model != "BA":
        overrides["kappa"] = args.kappa
    obj.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "analyses", None):
        obj["analyses"] = args.analyses
    if getattr(args, "log_events", False):
        obj["log_events"] = True
    if getattr(args, "raster", False):
        obj["raster"] = True
    return parse_spec(json.dumps(obj))


def _cmd_experiment(args, model: str) -> int:
    spec = _load_spec(args, model)
    status, _ = run_experiment(spec)
    log.info("wrote outputs to %s", spec.output_dir)
    return status


def _cmd_matching(args) -> int:
    if args.snapshots:
        snaps = io.read_snapshots_jsonl(args.snapshots)
        edges = snaps[args.index].edges
        if edges is None:
            raise SpecError("snapshot has no edge configuration (kappa must be 3 or 4)")
        xi = edges.signed
    else:
        xi = args.edges
    s = np.roll(as_signed(xi), -args.cut)
    n = args.length or s.size
    m = water_fill_matching(s, n)
    prof = running_sums(s, n)
    report = {"length": n, "cut": args.cut, "pairs": [[(a + args.cut) % s.size, (b + args.cut) % s.size]
                                                     for a, b in m],
              "matched_particles": 2 * len(m), "C": int(prof.C[-1]), "S": int(prof.S[-1]),
              "m": prof.m, "min_S": prof.m_closed, "formula": prof.matched_particles()}
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0 if report["formula"] == report["matched_particles"] else 1


def _cmd_rate_fit(args) -> int:
    trace = io.read_density_csv(args.densities)
    window = tuple(args.window) if args.window else None
    if window is None:
        pos = [row.t for row in trace.rows if row.t > 0 and row.r > 0]
        if not pos:
            raise SpecError("no positive densities to fit")
        window = (pos[0], pos[-1])
    fit = fit_power_law(trace, window)
    out = Path(args.out) if args.out else Path(args.densities).with_name("fits.json")
    io.write_json(out, {"rate_fit": fit.to_json()})
    print(f"r ~ {fit.c:.6g} t^-{fit.alpha:.6g}  (rms log residual {fit.residual:.3g}, "
          f"{fit.n_points} points on [{window[0]:g}, {window[1]:g}])")
    return 0


def _cmd_verify(args) -> int:
    passed, report = run_suite(args.suite)
    if args.out:
        io.write_json(args.out, report)
    else:
        print(json.dumps(report, indent=2, default=str))
    return 0 if passed else 1


def _cmd_render(args) -> int:
    snaps = io.read_snapshots_jsonl(args.snapshots)
    out = args.out or str(Path(args.snapshots).with_name("raster.ppm"))
    write_ppm(out, render_spacetime(snaps))
    print(f"{out}: {snaps[0].coloring.n} x {len(snaps)}")
    return 0


def _experiment_parser(sub, name, model, help_text):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--spec", help="JSON experiment spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--n-sites", type=int, dest="n_sites")
    p.add_argument("--t-max", type=float, dest="t_max")
    if model != "BA":
        p.add_argument("--kappa", type=int)
        p.add_argument("--raster", action="store_true", help="write raster.ppm for replica 0")
    p.add_argument("--analyses", nargs="+", help="analysis names, e.g. densities rate_fit")
    p.add_argument("--log-events", action="store_true", dest="log_events")
    p.set_defaults(func=lambda a: _cmd_experiment(a, model))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpslab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _experiment_parser(sub, "simulate", "CPS", "cyclic particle system replicas")
    _experiment_parser(sub, "cca", "CCA", "cyclic cellular automaton replicas")
    _experiment_parser(sub, "ba", "BA", "ballistic annihilation replicas")

    p = sub.add_parser("matching", help="water-filling matching of an edge sequence")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--edges", help="edge symbols, e.g. 'R.LRBL'")
    src.add_argument("--snapshots", help="snapshots.jsonl to read the configuration from")
    p.add_argument("--index", type=int, default=-1, help="snapshot index (default: last)")
    p.add_argument("--cut", type=int, default=0, help="edge at which the ring is cut open")
    p.add_argument("--length", type=int, help="interval length (default: whole ring)")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=_cmd_matching)

    p = sub.add_parser("rate-fit", help="power-law fit of a densities.csv")
    p.add_argument("densities")
    p.add_argument("--window", type=float, nargs=2, metavar=("T_MIN", "T_MAX"))
    p.add_argument("--out", help="fits.json path (default: next to the CSV)")
    p.set_defaults(func=_cmd_rate_fit)

    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--suite", choices=("fast", "full"), default="fast")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("render", help="space-time raster from snapshots.jsonl")
    p.add_argument("snapshots")
    p.add_argument("--out", help="PPM path (default: raster.ppm next to the input)")
    p.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (SpecError, ValueError, OSError) as exc:
        print(f"cpslab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ReplicaError as exc:
        print(f"cpslab {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
