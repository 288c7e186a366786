"""Command-line driver: per-file analysis, corpus fan-out, dataset emission
and coverage statistics.

Files are analyzed independently (one analysis per entry file; sibling
imports from the same directory are folded into that file's program), so
the corpus fans out over a process pool with no shared state.  A per-file
failure is recorded and never aborts the run; outputs are byte-stable
across reruns (timestamps live only in a sidecar file).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from . import callgraph, dfg, mlfilter, slicer
from .frontend import (
    Ast,
    CallOrNew,
    Import,
    collect_ast_calls,
    dump_ir,
    lower_program,
    parse_module,
)

__all__ = ["RunConfig", "CorpusStats", "main", "cmd_analyze", "cmd_slice_dataset",
           "cmd_stats", "cmd_mlgraph", "analyze_one_file"]

RELAXED_MATCH_RULE = "name-presence"


@dataclass(frozen=True)
class RunConfig:
    paths: tuple[str, ...]
    out_dir: str = "out"
    fmt: str = "json"  # "json" | "dot" (dot emitted alongside json)
    n_tokens: int = 1024
    ml_roots: tuple[str, ...] = tuple(sorted(mlfilter.DEFAULT_ROOTS))
    workers: int = 1
    budget_secs: float = 30.0
    restart_cap: int = 10
    turtle_depth: int = 8
    user_context: str = "mono"
    dump_ir: bool = False
    dump_callgraph: bool = False

    def analysis_options(self) -> callgraph.AnalysisOptions:
        return callgraph.AnalysisOptions(
            user_context=self.user_context,
            turtle_depth=self.turtle_depth,
            restart_cap=self.restart_cap,
            budget_secs=self.budget_secs,
        )

    def digest(self) -> str:
        # Fingerprint of the dataset-relevant configuration; operational
        # knobs (workers, output dir, dump flags) don't change the payload.
        relevant = {
            key: value
            for key, value in asdict(self).items()
            if key not in ("workers", "out_dir", "fmt", "dump_ir", "dump_callgraph")
        }
        payload = json.dumps(relevant, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class CorpusStats:
    files_total: int = 0
    files_analyzed: int = 0
    ast_calls_total: int = 0
    calls_matched_with_location: int = 0
    calls_matched_relaxed: int = 0
    programs_with_candidate_slices: int = 0
    label_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = asdict(self)
        payload["relaxed_match_rule"] = RELAXED_MATCH_RULE
        payload["label_counts"] = dict(sorted(self.label_counts.items()))
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# Discovery and per-file pipeline
# ---------------------------------------------------------------------------


def discover_files(paths: tuple[str, ...]) -> list[str]:
    found: list[str] = []
    for path in paths:
        if os.path.isdir(path):
            for root, _dirs, files in os.walk(path):
                for name in files:
                    if name.endswith(".py"):
                        found.append(os.path.join(root, name))
        else:
            found.append(path)
    return sorted(set(found))


def _sibling_map(file: str, corpus: tuple[str, ...]) -> dict[str, str]:
    directory = os.path.dirname(os.path.abspath(file))
    siblings = {}
    for other in corpus:
        if os.path.dirname(os.path.abspath(other)) == directory:
            stem = os.path.basename(other)[:-3]
            siblings[stem] = other
    return siblings


def _imported_siblings(tree: Ast, siblings: dict[str, str]) -> set[str]:
    import ast as pyast

    wanted: set[str] = set()
    for node in pyast.walk(tree.tree):
        if isinstance(node, pyast.Import):
            for alias in node.names:
                root = alias.name.split(".")[0]
                if root in siblings:
                    wanted.add(root)
        elif isinstance(node, pyast.ImportFrom) and node.module:
            root = node.module.split(".")[0]
            if root in siblings:
                wanted.add(root)
    return wanted


def analyze_one_file(
    file: str,
    corpus: tuple[str, ...],
    options: callgraph.AnalysisOptions,
) -> tuple[callgraph.AnalysisResult, dfg.DataflowGraph, dict[str, str]]:
    """Parse the file (plus transitively imported same-directory siblings),
    run the analysis with the file as entry, and build its dataflow graph.

    Returns (analysis, graph, sources).  Raises on parse failure or budget
    exhaustion; callers convert those into per-file error records.
    """
    siblings = _sibling_map(file, corpus)
    sources: dict[str, str] = {}
    trees: dict[str, Ast] = {}

    def load(path: str) -> Ast:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        parsed = parse_module(text, path)
        if not isinstance(parsed, Ast):
            first = parsed[0]
            raise SyntaxError(f"{first.file}:{first.line}: {first.message}")
        sources[path] = text
        return parsed

    entry_tree = load(file)
    entry_stem = os.path.basename(file)[:-3]
    trees[entry_stem] = entry_tree
    work = sorted(_imported_siblings(entry_tree, siblings) - {entry_stem})
    while work:
        stem = work.pop()
        if stem in trees:
            continue
        try:
            tree = load(siblings[stem])
        except (SyntaxError, OSError, UnicodeDecodeError):
            # A broken sibling never poisons this file's analysis; the
            # import just stays opaque.
            continue
        trees[stem] = tree
        for extra in sorted(_imported_siblings(tree, siblings)):
            if extra not in trees:
                work.append(extra)
    program = lower_program([trees[stem] for stem in sorted(trees)])
    result = callgraph.build(program, entry_stem, options)
    graph = dfg.build_dataflow_graph(result)
    return result, graph, sources


def _entry_site_tables(result: callgraph.AnalysisResult):
    """Spans and names of resolved call sites in the entry module."""
    module = result.program.modules[result.entry]
    spans = set()
    names = set()
    for proc in module.procedures.values():
        for ins in proc.instructions():
            if isinstance(ins, CallOrNew) and ins.site_id in result.resolved_sites:
                spans.add((ins.span.start, ins.span.end))
                names.add(ins.site_name)
    return spans, names


def _file_stats(result: callgraph.AnalysisResult, graph: dfg.DataflowGraph) -> dict:
    module = result.program.modules[result.entry]
    records = collect_ast_calls(module.ast)
    spans, names = _entry_site_tables(result)
    matched_loc = sum(1 for r in records if (r.span.start, r.span.end) in spans)
    matched_rel = sum(1 for r in records if r.simple_name in names)
    leaves = slicer.enumerate_candidate_leaves(graph)
    labels = [graph.node(i).label for i in leaves]
    return {
        "ast_calls": len(records),
        "matched_loc": matched_loc,
        "matched_rel": matched_rel,
        "labels": labels,
    }


# One picklable task runner for the process pool.
def _run_task(task: dict) -> dict:
    file = task["file"]
    config = RunConfig(**task["config"])
    out: dict = {"file": file, "ok": False}
    try:
        result, graph, sources = analyze_one_file(
            file, tuple(task["corpus"]), config.analysis_options()
        )
    except (
        SyntaxError,
        callgraph.AnalysisBudgetError,
        OSError,
        UnicodeDecodeError,
        RecursionError,
    ) as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
        return out
    out["ok"] = True
    mode = task["mode"]
    if mode == "analyze":
        out["graph_json"] = dfg.export_json(graph)
        if config.fmt == "dot":
            out["graph_dot"] = dfg.export_dot(graph)
        if config.dump_ir:
            out["ir"] = dump_ir(result.program)
        if config.dump_callgraph:
            out["callgraph"] = callgraph.dump_callgraph(result)
    elif mode == "mlgraph":
        cfg = mlfilter.MlFilterConfig(target_roots=frozenset(config.ml_roots))
        filtered = mlfilter.filter_graph(graph, cfg)
        out["graph_json"] = mlfilter.export_filtered_json(filtered)
        if config.fmt == "dot":
            out["graph_dot"] = mlfilter.export_filtered_dot(filtered)
    elif mode == "slice":
        examples = []
        skipped = 0
        for leaf in slicer.enumerate_candidate_leaves(graph):
            example = slicer.make_example(graph, leaf, sources, config.n_tokens)
            if example is None:
                skipped += 1
                continue
            examples.append(
                {
                    "file": example.file,
                    "line": example.target_span.start_line,
                    "col": example.target_span.start_col,
                    "label": example.label,
                    "complete": example.complete,
                    "slice": example.slice,
                    "combined": example.combined,
                }
            )
        out["examples"] = examples
        out["skipped"] = skipped
        out["stats"] = _file_stats(result, graph)
    elif mode == "stats":
        out["stats"] = _file_stats(result, graph)
    return out


def _run_corpus(files: list[str], config: RunConfig, mode: str) -> list[dict]:
    tasks = [
        {"file": f, "corpus": files, "config": asdict(config), "mode": mode}
        for f in files
    ]
    if config.workers > 1 and len(tasks) > 1:
        # Largest files first packs the pool better; results are re-sorted
        # so outputs never depend on scheduling.
        def size_of(task):
            try:
                return os.path.getsize(task["file"])
            except OSError:
                return 0

        ordered = sorted(tasks, key=lambda t: (-size_of(t), t["file"]))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_task, ordered))
        return sorted(results, key=lambda r: r["file"])
    return [_run_task(t) for t in tasks]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _safe_stem(file: str) -> str:
    stem = file[:-3] if file.endswith(".py") else file
    return stem.replace(os.sep, "__").replace("/", "__").lstrip("_.")


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _finish(results: list[dict], config: RunConfig) -> int:
    errors = [{"file": r["file"], "error": r["error"]} for r in results if not r["ok"]]
    if errors:
        _write(
            os.path.join(config.out_dir, "errors.json"),
            json.dumps(errors, sort_keys=True, indent=1) + "\n",
        )
        for err in errors:
            print(f"error: {err['file']}: {err['error']}", file=sys.stderr)
    ok = sum(1 for r in results if r["ok"])
    if results and ok == 0:
        return 1
    return 0


def cmd_analyze(config: RunConfig) -> int:
    files = discover_files(config.paths)
    results = _run_corpus(files, config, "analyze")
    for r in results:
        if not r["ok"]:
            continue
        stem = _safe_stem(r["file"])
        _write(os.path.join(config.out_dir, f"{stem}.graph.json"), r["graph_json"])
        if "graph_dot" in r:
            _write(os.path.join(config.out_dir, f"{stem}.graph.dot"), r["graph_dot"])
        if "ir" in r:
            sys.stdout.write(r["ir"])
        if "callgraph" in r:
            sys.stdout.write(r["callgraph"])
    return _finish(results, config)


def cmd_mlgraph(config: RunConfig) -> int:
    if not config.ml_roots or any(not r for r in config.ml_roots):
        print("error: --roots must name at least one nonempty prefix", file=sys.stderr)
        return 2
    files = discover_files(config.paths)
    results = _run_corpus(files, config, "mlgraph")
    for r in results:
        if not r["ok"]:
            continue
        stem = _safe_stem(r["file"])
        _write(os.path.join(config.out_dir, f"{stem}.mlgraph.json"), r["graph_json"])
        if "graph_dot" in r:
            _write(os.path.join(config.out_dir, f"{stem}.mlgraph.dot"), r["graph_dot"])
    return _finish(results, config)


def cmd_slice_dataset(config: RunConfig) -> int:
    files = discover_files(config.paths)
    results = _run_corpus(files, config, "slice")
    buffer = io.StringIO()
    examples = 0
    skipped = 0
    label_counts: dict[str, int] = {}
    for r in results:
        if not r["ok"]:
            continue
        for record in r["examples"]:
            buffer.write(json.dumps(record, sort_keys=True) + "\n")
            examples += 1
            label_counts[record["label"]] = label_counts.get(record["label"], 0) + 1
        skipped += r["skipped"]
    _write(os.path.join(config.out_dir, "dataset.jsonl"), buffer.getvalue())
    manifest = {
        "config_digest": config.digest(),
        "examples": examples,
        "files_analyzed": sum(1 for r in results if r["ok"]),
        "files_total": len(results),
        "label_counts": dict(sorted(label_counts.items())),
        "skipped": skipped,
    }
    _write(
        os.path.join(config.out_dir, "manifest.json"),
        json.dumps(manifest, sort_keys=True, indent=1) + "\n",
    )
    # Timestamps never go in payloads; they live in this sidecar only.
    _write(
        os.path.join(config.out_dir, "run_info.json"),
        json.dumps({"finished_at": time.strftime("%Y-%m-%dT%H:%M:%S")}) + "\n",
    )
    return _finish(results, config)


def compute_corpus_stats(results: list[dict]) -> CorpusStats:
    stats = CorpusStats(files_total=len(results))
    for r in results:
        if not r["ok"]:
            continue
        stats.files_analyzed += 1
        per_file = r["stats"]
        stats.ast_calls_total += per_file["ast_calls"]
        stats.calls_matched_with_location += per_file["matched_loc"]
        stats.calls_matched_relaxed += per_file["matched_rel"]
        if per_file["labels"]:
            stats.programs_with_candidate_slices += 1
        for label in per_file["labels"]:
            stats.label_counts[label] = stats.label_counts.get(label, 0) + 1
    return stats


def cmd_stats(config: RunConfig) -> int:
    files = discover_files(config.paths)
    results = _run_corpus(files, config, "stats")
    stats = compute_corpus_stats(results)
    _write(os.path.join(config.out_dir, "stats.json"), stats.to_json())
    rows = sorted(stats.label_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    total = sum(stats.label_counts.values()) or 1
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["label", "count", "cumulative_fraction"])
    running = 0
    for label, count in rows:
        running += count
        writer.writerow([label, count, f"{running / total:.6f}"])
    _write(os.path.join(config.out_dir, "labels.csv"), buffer.getvalue())
    return _finish(results, config)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turtleflow",
        description="Dataflow analysis of Python scripts with opaque-library "
        "(turtle) abstraction: graphs, completion slices, ML-pipeline filtering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("paths", nargs="+", help="Python files or directories")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--config", default=None, help="JSON config file (same keys as flags)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--budget-secs", type=float, default=30.0)
        p.add_argument("--restart-cap", type=int, default=10)
        p.add_argument("--turtle-depth", type=int, default=8)
        p.add_argument("--user-context", choices=["mono", "site"], default="mono")

    p_analyze = sub.add_parser("analyze", help="emit one dataflow graph per file")
    common(p_analyze)
    p_analyze.add_argument("--format", choices=["json", "dot"], default="json")
    p_analyze.add_argument("--dump-ir", action="store_true")
    p_analyze.add_argument("--dump-callgraph", action="store_true")

    p_slice = sub.add_parser("slice-dataset", help="emit completion examples as JSONL")
    common(p_slice)
    p_slice.add_argument("--n-tokens", type=int, default=1024)

    p_stats = sub.add_parser("stats", help="coverage and label statistics")
    common(p_stats)

    p_ml = sub.add_parser("mlgraph", help="emit ML-filtered graphs")
    common(p_ml)
    p_ml.add_argument("--format", choices=["json", "dot"], default="json")
    p_ml.add_argument("--roots", default=",".join(sorted(mlfilter.DEFAULT_ROOTS)))
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
    roots = getattr(args, "roots", ",".join(sorted(mlfilter.DEFAULT_ROOTS)))
    merged = {
        "paths": tuple(args.paths),
        "out_dir": args.out,
        "fmt": getattr(args, "format", "json"),
        "n_tokens": getattr(args, "n_tokens", 1024),
        "ml_roots": tuple(r for r in roots.split(",") if r != ""),
        "workers": args.workers,
        "budget_secs": args.budget_secs,
        "restart_cap": args.restart_cap,
        "turtle_depth": args.turtle_depth,
        "user_context": args.user_context,
        "dump_ir": getattr(args, "dump_ir", False),
        "dump_callgraph": getattr(args, "dump_callgraph", False),
    }
    for key, value in overrides.items():
        if key in merged:
            merged[key] = tuple(value) if isinstance(merged[key], tuple) else value
    return RunConfig(**merged)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    command = {
        "analyze": cmd_analyze,
        "slice-dataset": cmd_slice_dataset,
        "stats": cmd_stats,
        "mlgraph": cmd_mlgraph,
    }[args.command]
    return command(config)


if __name__ == "__main__":
    sys.exit(main())
