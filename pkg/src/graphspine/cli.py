"""Batch front-end: catalogs, spine homology runs, flow suites, smallness.

Four subcommands (`enumerate`, `spine`, `flow`, `check-smallness`), each
deterministic given its parsed RunConfig and each emitting an optional JSON
report beside the human-readable table on stdout.  Reports embed a hash of
the semantic config fields so downstream checks can pin exactly what ran;
worker count and output paths stay outside the hash because they cannot
change any computed value (the generators here are serial, so any worker
setting produces identical output by construction).

Exit codes: 0 success, 1 a computed check failed (flow invariant suite,
smallness verdict), 2 input error (bad flags, unsupported range, invalid
scene, malformed correspondence).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, asdict

import numpy as np

from . import __version__
from .catalogs import CATALOG_VERSION, enumerate_graphs
from .graphs import canonical_form
from .morphisms import collapse_forest

SUPPORTED_N = 4
SUPPORTED_S = 2
LARGE_RUNS = {(4, 1)}
RANK_MODES = ("modular", "exact", "both")

# flags that may also come from a key=value config file
CONFIG_KEYS = {
    "rank": int,
    "leaves": int,
    "max_dim": int,
    "rank_mode": str,
    "primes": int,
    "seed": int,
    "workers": int,
    "steps": int,
    "epsilon": float,
    "allow_large": lambda v: v.lower() in ("1", "true", "yes"),
    "stream": lambda v: v.lower() in ("1", "true", "yes"),
    "cache_dir": str,
}


@dataclass
class RunConfig:
    command: str
    n: int = None
    s: int = None
    max_dim: int = None
    rank_mode: str = "both"
    primes: int = 3
    seed: int = 0
    workers: int = None
    allow_large: bool = False
    stream: bool = False
    steps: int = None
    epsilon: float = None
    cache_dir: str = None
    out: str = None
    report: str = None
    scene: str = None
    input: str = None

    def __post_init__(self):
        if self.rank_mode not in RANK_MODES:
            raise ValueError("rank mode must be one of %s" % (RANK_MODES,))
        if self.primes < 1:
            raise ValueError("need at least one prime")
        if self.workers is None:
            self.workers = int(
                os.environ.get("GRAPHSPINE_WORKERS", os.cpu_count() or 1)
            )
        if self.workers < 1:
            raise ValueError("worker count must be positive")

    def semantic_dict(self):
        d = asdict(self)
        for k in ("workers", "out", "report", "scene", "input", "cache_dir"):
            d.pop(k)
        return d

    def config_hash(self):
        blob = json.dumps(self.semantic_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _report_envelope(cfg, result):
    return {
        "schema": 1,
        "command": cfg.command,
        "config": cfg.semantic_dict(),
        "config_hash": cfg.config_hash(),
        "version": __version__,
        "catalog_version": CATALOG_VERSION,
        "result": result,
    }


def _emit(cfg, result):
    if cfg.report:
        with open(cfg.report, "w") as fh:
            json.dump(_report_envelope(cfg, result), fh, indent=1)


def _check_range(n, s):
    if n is None or s is None:
        return "both --rank and --leaves are required"
    if n < 0 or s < 0 or n + s < 1:
        return "need rank >= 0, leaves >= 0, rank + leaves >= 1"
    if n > SUPPORTED_N or s > SUPPORTED_S:
        return "supported range is rank <= %d, leaves <= %d" % (
            SUPPORTED_N,
            SUPPORTED_S,
        )
    return None


def cmd_enumerate(cfg):
    why = _check_range(cfg.n, cfg.s)
    if why:
        print("error:", why, file=sys.stderr)
        return 2
    cat = enumerate_graphs(cfg.n, cfg.s, cache_dir=cfg.cache_dir)
    by_vertices = {}
    for g in cat:
        nv = len(g.vertices) - len(g.leaf_labels)
        by_vertices[nv] = by_vertices.get(nv, 0) + 1
    word = "class" if len(cat) == 1 else "classes"
    print("%d %s at rank %d with %d leaves" % (len(cat), word, cfg.n, cfg.s))
    for nv in sorted(by_vertices):
        print("  %2d internal vertices: %4d" % (nv, by_vertices[nv]))
    if cfg.out:
        cat.save(cfg.out)
        print("catalog written to", cfg.out)
    _emit(
        cfg,
        {
            "classes": len(cat),
            "by_internal_vertices": {str(k): v for k, v in sorted(by_vertices.items())},
        },
    )
    return 0


def cmd_spine(cfg):
    why = _check_range(cfg.n, cfg.s)
    if why:
        print("error:", why, file=sys.stderr)
        return 2
    large = (cfg.n, cfg.s) in LARGE_RUNS
    if large and not cfg.allow_large:
        print(
            "error: (%d,%d) is a large run (about 14e6 raw chains over 771 "
            "graph classes, hours of rank work); pass --allow-large to "
            "proceed" % (cfg.n, cfg.s),
            file=sys.stderr,
        )
        return 2
    if large or cfg.stream:
        from .spine import EXACT_COLUMN_BOUND
        from .spine_stream import stream_spine_betti

        rep = stream_spine_betti(
            cfg.n,
            cfg.s,
            primes=cfg.primes,
            seed=cfg.seed,
            max_dim=cfg.max_dim,
            cache_dir=cfg.cache_dir,
            exact_cols=0 if cfg.rank_mode == "modular" else EXACT_COLUMN_BOUND,
        )
    else:
        from .spine import betti_report_dict, build_spine_complex, betti_numbers

        complex_ = build_spine_complex(
            cfg.n, cfg.s, max_dim=cfg.max_dim, cache_dir=cfg.cache_dir
        )
        mode = {"modular": "modular", "exact": "exact", "both": "auto"}[cfg.rank_mode]
        report = betti_numbers(complex_, mode=mode, primes=cfg.primes, seed=cfg.seed)
        rep = betti_report_dict(complex_, report)
    print("spine of rank %d with %d leaves" % (cfg.n, cfg.s))
    print("  %-5s %8s %8s %6s" % ("dim", "cells", "rank d", "betti"))
    for k, c in enumerate(rep["cells"]):
        rk = rep["ranks"].get(k, rep["ranks"].get(str(k), "-"))
        print("  %-5d %8d %8s %6d" % (k, c, rk, rep["betti"][k]))
    print("  euler %d  connected %s" % (rep["euler"], rep["connected"]))
    cert = rep.get("certified")
    if cert is not None:
        print("  exact certification:", cert)
    _emit(cfg, rep)
    return 0


def _load_scene(cfg):
    from .flow import EmbeddedGraph, radial_scene

    if cfg.scene:
        with open(cfg.scene) as fh:
            blob = json.load(fh)
        g = EmbeddedGraph.from_json_dict(blob["graph"])
        tree = tuple(int(e) for e in blob["tree_edges"])
        return g, tree
    return radial_scene()


def cmd_flow(cfg):
    from .flow import check_collapsible, flow_frames, write_frames_csv

    try:
        g, tree = _load_scene(cfg)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print("error: cannot load scene: %s" % exc, file=sys.stderr)
        return 2
    bad = g.validate()
    if bad:
        print("error: scene graph invalid:", "; ".join(bad[:5]), file=sys.stderr)
        return 2
    scene = check_collapsible(g, tree)
    if not scene.ok:
        clauses = sorted(set(v["clause"] for v in scene.violations))
        print("error: scene not collapsible, clauses:", ", ".join(clauses), file=sys.stderr)
        for v in scene.violations[:10]:
            print("  ", v, file=sys.stderr)
        return 2

    steps = cfg.steps if cfg.steps is not None else 10
    if steps < 0:
        print("error: steps must be >= 0", file=sys.stderr)
        return 2
    times = [i / steps for i in range(steps + 1)] if steps else [0.0]
    frames = flow_frames(scene, times)

    failures = []
    for t, fg in frames:
        msgs = fg.validate()
        if msgs:
            failures.append("frame t=%.4g: %s" % (t, msgs[0]))
    f0 = frames[0][1]
    drift = 0.0
    for e0, e1 in zip(g.edges, f0.edges):
        if len(e0) != len(e1):
            failures.append("frame t=0 resampled an edge")
            break
        drift = max(
            drift,
            float(np.max(np.abs(e0.params - e1.params))),
            float(np.max(np.linalg.norm(e0.points - e1.points, axis=1))),
        )
    if drift > 1e-9:
        failures.append("frame t=0 differs from input by %.3g" % drift)
    if times[-1] == 1.0:
        end = frames[-1][1].to_abstract()
        target = collapse_forest(g.to_abstract(), list(tree))[0]
        if canonical_form(end)[0] != canonical_form(target)[0]:
            failures.append("t=1 endpoint does not match the tree collapse")

    if cfg.out:
        write_frames_csv(frames, cfg.out)
        print("%d frames written to %s" % (len(frames), cfg.out))
    for f in failures:
        print("FAIL:", f)
    verdict = "pass" if not failures else "fail"
    print("flow invariant suite: %s (%d frames)" % (verdict, len(frames)))
    _emit(
        cfg,
        {
            "frames": len(frames),
            "suite": verdict,
            "failures": failures,
            "t0_drift": drift,
        },
    )
    return 0 if not failures else 1


def cmd_check_smallness(cfg):
    from .flow import EmbeddedGraph, SmallnessSpec, check_smallness

    if not cfg.input:
        print("error: --input FILE is required", file=sys.stderr)
        return 2
    try:
        with open(cfg.input) as fh:
            blob = json.load(fh)
        corr = {}
        for entry in blob["correspondence"]:
            ei, i, pt = entry
            corr[(int(ei), int(i))] = np.asarray(pt, dtype=float)
        spec = SmallnessSpec(
            epsilon=float(blob["epsilon"]) if cfg.epsilon is None else cfg.epsilon,
            k_lo=blob["k_lo"],
            k_hi=blob["k_hi"],
            domain=EmbeddedGraph.from_json_dict(blob["domain"]),
            codomain=EmbeddedGraph.from_json_dict(blob["codomain"]),
            correspondence=corr,
            q_lo=blob.get("q_lo"),
            q_hi=blob.get("q_hi"),
            containment_tol=float(blob.get("containment_tol", 1e-9)),
        )
    except (OSError, KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print("error: malformed smallness input: %s" % exc, file=sys.stderr)
        return 2
    ok, report = check_smallness(spec)
    for clause in ("coverage", "containment", "pointwise", "derivative"):
        print("  %-12s %s" % (clause, report[clause]))
    print("small:", ok)
    result = {"small": ok, "clauses": _jsonable(report)}
    _emit(cfg, result)
    return 0 if ok else 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _read_config_file(path):
    values = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("line %d: expected key = value" % line_no)
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in CONFIG_KEYS:
                raise ValueError("line %d: unknown key %r" % (line_no, key))
            values[key] = CONFIG_KEYS[key](val.strip())
    return values


def build_parser():
    ap = argparse.ArgumentParser(
        prog="graphspine",
        description="catalogs of stable graphs, spine homology, collapse flows",
    )
    ap.add_argument("--config", help="key = value file with defaults for flags")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, *, ns=False, ranks=False):
        if ns:
            p.add_argument("--rank", type=int, default=None, help="free-group rank n")
            p.add_argument("--leaves", type=int, default=None, help="labelled leaf count s")
        if ranks:
            p.add_argument("--max-dim", type=int, default=None)
            p.add_argument("--rank-mode", choices=RANK_MODES, default=None)
            p.add_argument("--primes", type=int, default=None)
            p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--cache-dir", default=None)
        p.add_argument("--report", default=None, help="write a JSON report here")

    p = sub.add_parser("enumerate", help="count and store graph classes")
    add_common(p, ns=True)
    p.add_argument("--out", default=None, help="write the catalog (jsonl)")

    p = sub.add_parser("spine", help="cells, boundary ranks, Betti numbers")
    add_common(p, ns=True, ranks=True)
    p.add_argument("--allow-large", action="store_true", default=None)
    p.add_argument("--stream", action="store_true", default=None,
                   help="use the low-memory streamed pipeline")

    p = sub.add_parser("flow", help="run the collapse flow and its invariant suite")
    add_common(p)
    p.add_argument("--scene", default=None,
                   help="scene JSON {graph, tree_edges}; default: built-in radial scene")
    p.add_argument("--steps", type=int, default=None, help="frames minus one (default 10)")
    p.add_argument("--out", default=None, help="write frames CSV here")

    p = sub.add_parser("check-smallness", help="sampled closeness verdict")
    add_common(p)
    p.add_argument("--input", default=None, help="JSON with graphs, box, correspondence")
    p.add_argument("--epsilon", type=float, default=None, help="override epsilon")
    return ap


def main(argv=None):
    ap = build_parser()
    args = vars(ap.parse_args(argv))
    config_path = args.pop("config", None)
    file_values = {}
    if config_path:
        try:
            file_values = _read_config_file(config_path)
        except (OSError, ValueError) as exc:
            print("error: bad config file: %s" % exc, file=sys.stderr)
            return 2

    merged = {}
    for key, val in args.items():
        name = {"rank": "n", "leaves": "s"}.get(key, key)
        if val is None and key in file_values:
            val = file_values[key]
        merged[name] = val
    defaults = {"rank_mode": "both", "primes": 3, "seed": 0, "allow_large": False,
                "stream": False}
    for key, val in defaults.items():
        if merged.get(key) is None:
            merged[key] = val
    try:
        cfg = RunConfig(**merged)
    except (TypeError, ValueError) as exc:
        print("error:", exc, file=sys.stderr)
        return 2

    handler = {
        "enumerate": cmd_enumerate,
        "spine": cmd_spine,
        "flow": cmd_flow,
        "check-smallness": cmd_check_smallness,
    }[cfg.command]
    return handler(cfg)


if __name__ == "__main__":
    sys.exit(main())
