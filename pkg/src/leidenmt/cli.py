"""Command-line front end: detect, audit, and bench subcommands.

The CLI itself is single-threaded; parallelism lives inside the library
calls and is controlled by ``--threads`` (falling back to the
``LEIDEN_THREADS`` environment variable).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .audit import AuditReport, audit
from .graph import CsrGraph
from .io import GraphLoadError, load_graph, read_membership, write_membership
from .leiden import LabelStrategy, LeidenConfig, LeidenResult, RefineStrategy, leiden

__all__ = ["main", "entry", "RunReport"]

THREADS_ENV_VAR = "LEIDEN_THREADS"


@dataclass
class RunReport:
    """Everything one detect run reports: inputs, timings, quality."""

    graph_name: str
    num_vertices: int
    num_arcs: int
    config: dict
    repeats: int
    passes: int
    iterations: list[tuple[int, int]]
    phase_seconds: dict[str, float]
    wall_seconds: float
    edges_per_second: float
    num_communities: int
    modularity: float | None
    num_disconnected: int
    disconnected_fraction: float
    size_min: int
    size_max: int
    size_mean: float

    def to_dict(self) -> dict:
        return {
            "graph": self.graph_name,
            "n": self.num_vertices,
            "m": self.num_arcs,
            "config": self.config,
            "repeats": self.repeats,
            "passes": self.passes,
            "iterations": [list(pair) for pair in self.iterations],
            "phase_seconds": {k: float(v) for k, v in self.phase_seconds.items()},
            "wall_seconds": self.wall_seconds,
            "edges_per_second": self.edges_per_second,
            "num_communities": self.num_communities,
            "modularity": self.modularity,
            "num_disconnected": self.num_disconnected,
            "disconnected_fraction": self.disconnected_fraction,
            "community_size_min": self.size_min,
            "community_size_max": self.size_max,
            "community_size_mean": self.size_mean,
        }

    def to_text(self) -> str:
        cfg = self.config
        q = "undefined" if self.modularity is None else f"{self.modularity:.6f}"
        lines = [
            f"graph:           {self.graph_name} (N={self.num_vertices}, M={self.num_arcs})",
            f"threads:         {cfg['threads']}  refine={cfg['refine_strategy']}"
            f"  label={cfg['label_strategy']}  seed={cfg['rng_seed']}",
            f"repeats:         {self.repeats}",
            f"passes:          {self.passes}  iterations={self.iterations}",
            f"wall seconds:    {self.wall_seconds:.6f}"
            f"  ({self.edges_per_second / 1e6:.2f} M edges/s)",
            "phase seconds:   "
            + "  ".join(f"{k}={v:.6f}" for k, v in self.phase_seconds.items()),
            f"communities:     {self.num_communities}",
            f"modularity:      {q}",
            f"disconnected:    {self.num_disconnected}"
            f" (fraction {self.disconnected_fraction:.6f})",
            f"community sizes: min={self.size_min} max={self.size_max}"
            f" mean={self.size_mean:.2f}",
        ]
        return "\n".join(lines)


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"invalid {THREADS_ENV_VAR} value: {env!r}") from exc
    return 1


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tolerance", type=float, default=None,
                        help="initial per-iteration convergence threshold")
    parser.add_argument("--tolerance-drop", type=float, default=None,
                        help="divisor applied to the tolerance every pass")
    parser.add_argument("--aggregation-tolerance", type=float, default=None,
                        help="community shrink ratio above which passes stop")
    parser.add_argument("--max-iterations", type=int, default=None,
                        help="iteration cap per local-moving phase")
    parser.add_argument("--max-passes", type=int, default=None,
                        help="pass cap for the whole pipeline")
    parser.add_argument("--refine", choices=[s.value for s in RefineStrategy],
                        default=None, help="refinement strategy")
    parser.add_argument("--label", choices=[s.value for s in LabelStrategy],
                        default=None, help="super-vertex labelling strategy")
    parser.add_argument("--seed", type=int, default=None,
                        help="nonzero 32-bit seed for randomized refinement")


def _config_from_args(args, threads: int) -> LeidenConfig:
    mapping: dict = {"threads": threads}
    pairs = [
        ("tolerance", args.tolerance),
        ("tolerance_drop", args.tolerance_drop),
        ("aggregation_tolerance", args.aggregation_tolerance),
        ("max_iterations", args.max_iterations),
        ("max_passes", args.max_passes),
        ("refine_strategy", args.refine),
        ("label_strategy", args.label),
        ("rng_seed", args.seed),
    ]
    mapping.update({key: value for key, value in pairs if value is not None})
    return LeidenConfig.from_mapping(mapping)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leidenmt",
        description="Multithreaded Leiden community detection: detect "
                    "communities, audit memberships, benchmark scaling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect communities in a graph")
    p_detect.add_argument("--input", required=True, help="graph file (.mtx or edge list)")
    p_detect.add_argument("--output", default=None,
                          help="write membership TSV (vertex<TAB>community)")
    p_detect.add_argument("--threads", type=int, default=None,
                          help=f"worker threads (default: ${THREADS_ENV_VAR} or 1)")
    p_detect.add_argument("--repeat", type=int, default=1,
                          help="run the detection this many times and average timings")
    p_detect.add_argument("--json", action="store_true", help="emit a JSON report")
    _add_config_arguments(p_detect)

    p_audit = sub.add_parser("audit", help="audit a membership file against a graph")
    p_audit.add_argument("--input", required=True, help="graph file")
    p_audit.add_argument("--membership", required=True, help="membership TSV")
    p_audit.add_argument("--threads", type=int, default=None)

    p_bench = sub.add_parser("bench", help="benchmark thread/strategy sweeps")
    p_bench.add_argument("--input", required=True, help="graph file")
    p_bench.add_argument("--threads-list", default="1,2,4,8",
                         help="comma-separated thread counts")
    p_bench.add_argument("--repeat", type=int, default=5,
                         help="repeats per configuration (timings averaged)")
    p_bench.add_argument("--strategies", choices=["default", "all"],
                         default="default",
                         help="'all' sweeps refine x label variants")
    p_bench.add_argument("--output", default=None, help="CSV output path (default stdout)")
    _add_config_arguments(p_bench)
    return parser


def _load_graph_checked(path: str) -> CsrGraph:
    if not Path(path).exists():
        raise GraphLoadError(f"input file not found: {path}")
    return load_graph(path)


def _run_repeats(g: CsrGraph, cfg: LeidenConfig, repeats: int):
    """Run leiden ``repeats`` times; returns (last result, mean wall, mean phases)."""
    walls = []
    phases = {"local_moving": 0.0, "refinement": 0.0, "aggregation": 0.0, "other": 0.0}
    result: LeidenResult | None = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = leiden(g, cfg)
        walls.append(time.perf_counter() - t0)
        for key in phases:
            phases[key] += result.phase_seconds[key]
    mean_wall = sum(walls) / len(walls)
    mean_phases = {k: v / repeats for k, v in phases.items()}
    return result, mean_wall, mean_phases


def _build_report(name: str, g: CsrGraph, cfg: LeidenConfig, repeats: int,
                  result: LeidenResult, wall: float, phases: dict,
                  report: AuditReport) -> RunReport:
    sizes = report.sizes
    return RunReport(
        graph_name=name,
        num_vertices=g.num_vertices,
        num_arcs=g.num_arcs,
        config=cfg.to_dict(),
        repeats=repeats,
        passes=result.passes,
        iterations=result.iterations,
        phase_seconds=phases,
        wall_seconds=wall,
        edges_per_second=(g.num_arcs / wall) if wall > 0 else 0.0,
        num_communities=result.num_communities,
        modularity=report.modularity,
        num_disconnected=report.num_disconnected,
        disconnected_fraction=report.disconnected_fraction,
        size_min=int(sizes.min()) if sizes.size else 0,
        size_max=int(sizes.max()) if sizes.size else 0,
        size_mean=float(sizes.mean()) if sizes.size else 0.0,
    )


def cmd_detect(args) -> int:
    threads = _resolve_threads(args.threads)
    g = _load_graph_checked(args.input)
    cfg = _config_from_args(args, threads)
    if args.repeat < 1:
        raise ValueError("--repeat must be >= 1")
    result, wall, phases = _run_repeats(g, cfg, args.repeat)
    report = audit(g, result.membership, threads=threads)
    if args.output:
        write_membership(args.output, result.membership)
    run = _build_report(Path(args.input).name, g, cfg, args.repeat, result,
                        wall, phases, report)
    if args.json:
        print(json.dumps(run.to_dict(), indent=2))
    else:
        print(run.to_text())
    return 0


def cmd_audit(args) -> int:
    threads = _resolve_threads(args.threads)
    g = _load_graph_checked(args.input)
    membership = read_membership(args.membership, num_vertices=g.num_vertices)
    report = audit(g, membership, threads=threads)
    sizes = report.sizes
    q = "undefined" if report.modularity is None else f"{report.modularity:.6f}"
    print(f"graph:           {Path(args.input).name} "
          f"(N={g.num_vertices}, M={g.num_arcs})")
    print(f"communities:     {report.num_communities}")
    print(f"modularity:      {q}")
    if sizes.size:
        print(f"community sizes: min={int(sizes.min())} max={int(sizes.max())}"
              f" mean={float(sizes.mean()):.2f}")
    else:
        print("community sizes: none")
    print(f"disconnected:    {report.num_disconnected}"
          f" (fraction {report.disconnected_fraction:.6f})")
    return 0 if report.num_disconnected == 0 else 1


_BENCH_COLUMNS = [
    "graph", "n", "m", "threads", "refine", "label", "repeats",
    "wall_seconds", "local_moving_seconds", "refinement_seconds",
    "aggregation_seconds", "other_seconds", "modularity", "communities",
    "disconnected", "speedup",
]


def cmd_bench(args) -> int:
    g = _load_graph_checked(args.input)
    name = Path(args.input).name
    try:
        thread_counts = [int(tok) for tok in args.threads_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"invalid --threads-list: {args.threads_list!r}") from exc
    if not thread_counts or any(t < 1 for t in thread_counts):
        raise ValueError(f"invalid --threads-list: {args.threads_list!r}")
    if args.repeat < 1:
        raise ValueError("--repeat must be >= 1")

    if args.strategies == "all":
        strategies = [(r, l) for r in RefineStrategy for l in LabelStrategy]
    else:
        base = _config_from_args(args, threads=1)
        strategies = [(base.refine_strategy, base.label_strategy)]

    rows = []
    for refine, label in strategies:
        baseline = None
        for threads in thread_counts:
            cfg = _config_from_args(args, threads)
            cfg.refine_strategy = refine
            cfg.label_strategy = label
            result, wall, phases = _run_repeats(g, cfg, args.repeat)
            report = audit(g, result.membership, threads=threads)
            if threads == 1 and baseline is None:
                baseline = wall
            speedup = (baseline / wall) if (baseline and wall > 0) else ""
            rows.append({
                "graph": name,
                "n": g.num_vertices,
                "m": g.num_arcs,
                "threads": threads,
                "refine": refine.value,
                "label": label.value,
                "repeats": args.repeat,
                "wall_seconds": f"{wall:.6f}",
                "local_moving_seconds": f"{phases['local_moving']:.6f}",
                "refinement_seconds": f"{phases['refinement']:.6f}",
                "aggregation_seconds": f"{phases['aggregation']:.6f}",
                "other_seconds": f"{phases['other']:.6f}",
                "modularity": "" if report.modularity is None
                              else f"{report.modularity:.6f}",
                "communities": result.num_communities,
                "disconnected": report.num_disconnected,
                "speedup": f"{speedup:.4f}" if speedup != "" else "",
            })

    buffer = _io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_BENCH_COLUMNS)
    writer.writeheader()
    writer.writerows(rows)
    text = buffer.getvalue()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    handlers = {"detect": cmd_detect, "audit": cmd_audit, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except (GraphLoadError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
