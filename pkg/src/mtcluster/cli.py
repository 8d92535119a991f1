"""Command-line interface: ``mtcluster {check,run,verify,enumerate}``.

Every subcommand prints one JSON document (``schema_version`` 1).

Exit codes: 0 success / in region, 1 usage or parse error, 2 out of region
(``check``) or a failed family (``verify``), 3 step cap exhausted (``run``).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import check_auto, check_dobrushin, check_fp, check_shearer_region, mt_bounds
from .depgraph import DependencyGraph
from .errors import MTClusterError, InvalidInstanceError
from .instances import hypergraph_coloring_to_lll, parse_dimacs, parse_hypergraph, sat_to_lll
from .mt_engine import (
    DEFAULT_STEP_CAP,
    CountAccumulator,
    event_probabilities,
    replay_assignment,
    run_mt,
    validate_instance,
)
from .penrose import penrose_trees
from .suite import run_suite
from .trees import enumerate_labeled_trees, enumerate_plane_trees

SCHEMA_VERSION = 1
DEFAULT_SEED = 20130527

EXIT_OK, EXIT_ERROR, EXIT_OUT_OF_REGION, EXIT_CAP = 0, 1, 2, 3


@dataclass
class Instance:
    g: DependencyGraph
    p: np.ndarray
    model: object = None
    events: list | None = None


def load_instance(path: str, fmt: str) -> Instance:
    text = Path(path).read_text()
    if fmt == "dimacs":
        m, events, g = sat_to_lll(parse_dimacs(text))
    elif fmt == "hypergraph":
        m, events, g = hypergraph_coloring_to_lll(parse_hypergraph(text))
    elif fmt == "depgraph":
        doc = json.loads(text)
        g = DependencyGraph.from_edges(int(doc["n"]), [tuple(e) for e in doc["edges"]])
        p = np.asarray(doc["p"], dtype=np.float64)
        if p.shape != (g.n_vertices,):
            raise InvalidInstanceError("depgraph p must have one entry per vertex")
        return Instance(g, p)
    else:
        raise InvalidInstanceError(f"unknown format {fmt!r}")
    return Instance(g, event_probabilities(events, m), m, events)


def parse_seeds(text: str) -> range:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise InvalidInstanceError(f"--seeds expects A..B, got {text!r}")
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise InvalidInstanceError("--seeds upper end below lower end")
    return range(lo, hi + 1)


def _emit(doc: dict, output: str | None) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _instance_summary(inst: Instance, fmt: str) -> dict:
    return {"format": fmt, "n_events": inst.g.n_vertices, "n_edges": len(inst.g.edges),
            "p": [float(x) for x in inst.p]}


def _bounds_or_none(inst: Instance, paranoid: bool):
    region = check_shearer_region(inst.g, inst.p, paranoid)
    if not region.in_region:
        return region, None
    return region, mt_bounds(inst.g, inst.p, paranoid)


def cmd_check(args) -> int:
    inst = load_instance(args.input, args.format)
    if args.mu == "auto":
        dob = check_auto(inst.g, inst.p, "dobrushin")
        fp = check_auto(inst.g, inst.p, "fernandez_procacci")
    else:
        mu = [float(v) for v in args.mu.split(",")]
        dob = check_dobrushin(inst.g, inst.p, mu)
        fp = check_fp(inst.g, inst.p, mu)
    region, bounds = _bounds_or_none(inst, args.paranoid)
    _emit({
        "command": "check",
        "instance": _instance_summary(inst, args.format),
        "dobrushin": dob.to_dict(),
        "fernandez_procacci": fp.to_dict(),
        "shearer": region.to_dict(),
        "mt_bounds": None if bounds is None else bounds.to_dict(),
        "in_region": region.in_region,
    }, args.output)
    return EXIT_OK if region.in_region else EXIT_OUT_OF_REGION


def _batch_worker(job) -> CountAccumulator:
    path, fmt, seeds, step_cap, rule = job
    inst = load_instance(path, fmt)
    acc = CountAccumulator(inst.g.n_vertices)
    for s in seeds:
        acc.add(run_mt(inst.model, inst.events, inst.g, s, step_cap, rule, validate=False))
    return acc


def cmd_run(args) -> int:
    inst = load_instance(args.input, args.format)
    if inst.model is None:
        raise InvalidInstanceError("run needs a variable model (dimacs or hypergraph input)")
    validate_instance(inst.model, inst.events, inst.g)
    region, bounds = _bounds_or_none(inst, False)
    t_bounds = None if bounds is None else [v.t_bound for v in bounds.per_vertex]
    if args.seeds:
        seeds = parse_seeds(args.seeds)
        workers = max(1, args.workers)
        chunks = [seeds[i::workers] for i in range(workers)]
        jobs = [(args.input, args.format, list(c), args.step_cap, args.rule) for c in chunks]
        if workers == 1:
            parts = [_batch_worker(jobs[0])]
        else:
            with ProcessPoolExecutor(workers) as pool:
                parts = list(pool.map(_batch_worker, jobs))
        acc = parts[0]
        for part in parts[1:]:
            acc = acc.merge(part)
        mean, se = acc.mean, acc.std_error
        within = None if t_bounds is None else [
            bool(mean[x] <= t_bounds[x] + 3 * se[x]) for x in range(inst.g.n_vertices)
        ]
        _emit({
            "command": "run",
            "mode": "batch",
            "instance": _instance_summary(inst, args.format),
            "rule": args.rule,
            "seeds": [seeds.start, seeds.stop - 1],
            "runs": acc.runs,
            "unfinished": acc.unfinished,
            "mean_counts": mean.tolist(),
            "std_error": [float(v) if np.isfinite(v) else None for v in se],
            "t_bounds": t_bounds,
            "within_3se": within,
        }, args.output)
        return EXIT_CAP if acc.unfinished else EXIT_OK
    log = run_mt(inst.model, inst.events, inst.g, args.seed, args.step_cap, args.rule,
                 validate=False)
    still_bad = replay_assignment(inst.events, log.assignment)
    _emit({
        "command": "run",
        "mode": "single",
        "instance": _instance_summary(inst, args.format),
        "log": log.to_dict(),
        "total_steps": len(log.steps),
        "verified": log.terminated and not still_bad,
        "violated_at_end": still_bad,
        "t_bounds": t_bounds,
        "total_bound": None if bounds is None else bounds.total_bound,
    }, args.output)
    return EXIT_OK if log.terminated else EXIT_CAP


def cmd_verify(args) -> int:
    results = run_suite(seed=args.seed, n_random=args.random_graphs, max_n=args.max_n,
                        mutate=args.mutate)
    ok = all(r.passed for r in results)
    _emit({
        "command": "verify",
        "mutate": args.mutate,
        "families": [r.to_dict() for r in results],
        "passed": ok,
    }, args.output)
    return EXIT_OK if ok else EXIT_OUT_OF_REGION


def _labeled_text(theta) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(theta.edges))


def cmd_enumerate(args) -> int:
    if args.kind == "plane":
        items = [t.to_string() for t in enumerate_plane_trees(args.n)]
    elif args.kind == "labeled":
        items = [_labeled_text(th) for th in enumerate_labeled_trees(args.n)]
    else:
        if args.tuple is None:
            raise InvalidInstanceError("penrose listing needs --tuple")
        tup = [int(v) for v in args.tuple.split(",")]
        if args.input:
            g = load_instance(args.input, args.format).g
        else:
            edges = []
            if args.edges:
                for part in args.edges.split(","):
                    a, _, b = part.partition("-")
                    edges.append((int(a), int(b)))
            n_vertices = args.vertices if args.vertices is not None else max(tup) + 1
            g = DependencyGraph.from_edges(n_vertices, edges)
        items = [_labeled_text(th) for th in penrose_trees(tup, g)]
        args.n = len(tup) - 1
    if args.text:
        out = "\n".join(items) + "\n"
        if args.output:
            Path(args.output).write_text(out)
        else:
            sys.stdout.write(out)
        return EXIT_OK
    _emit({"command": "enumerate", "kind": args.kind, "n": args.n, "count": len(items),
           "items": items}, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtcluster",
        description="Convergence criteria, Penrose trees and Moser-Tardos resampling.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_args(p, required=True):
        p.add_argument("--input", required=required, help="instance file")
        p.add_argument("--format", choices=("dimacs", "hypergraph", "depgraph"), default="dimacs")
        p.add_argument("--output", help="write the JSON report here instead of stdout")

    p = sub.add_parser("check", help="convergence criteria and resampling bounds")
    instance_args(p)
    p.add_argument("--mu", default="auto", help="'auto' or comma-separated mu values")
    p.add_argument("--paranoid", action="store_true", help="test all 2^n subsets")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="run the resampling algorithm")
    instance_args(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--seeds", help="batch mode over seeds A..B (inclusive)")
    p.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP)
    p.add_argument("--rule", choices=("lowest", "random"), default="lowest")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="exhaustive oracle suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-graphs", type=int, default=200)
    p.add_argument("--n-max", "--max-n", dest="max_n", type=int, default=4,
                   help="largest tuple size n (n+1 points)")
    p.add_argument("--mutate", action="store_true",
                   help="drop the younger-uncle Penrose condition (should fail)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enumerate", help="list plane, labeled or Penrose trees")
    instance_args(p, required=False)
    p.add_argument("--kind", choices=("plane", "labeled", "penrose"), default="plane")
    p.add_argument("--n", "--n-max", dest="n", type=int, default=3,
                   help="number of non-root vertices")
    p.add_argument("--tuple", help="comma-separated point tuple for --kind penrose")
    p.add_argument("--edges", help="dependency graph edges, e.g. 0-1,1-2")
    p.add_argument("--vertices", type=int)
    p.add_argument("--text", action="store_true", help="plain text, one item per line")
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MTClusterError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        doc = {"schema_version": SCHEMA_VERSION, "error": str(exc), "kind": type(exc).__name__}
        sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
