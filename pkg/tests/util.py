"""Shared test helpers: one-call pipelines and random fixture generators."""

import os
import random

from turtleflow import callgraph
from turtleflow.dfg import build_dataflow_graph
from turtleflow.frontend import Ast, lower_program, parse_module

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def fixture_path(*parts) -> str:
    return os.path.join(FIXTURES, *parts)


def analyze_source(source: str, name: str = "snippet", options=None, extra=None):
    """Parse+lower+analyze a source string (plus optional {name: source}
    sibling modules); returns (result, graph, sources)."""
    modules = {name: source}
    modules.update(extra or {})
    trees = []
    sources = {}
    for mod_name, text in sorted(modules.items()):
        path = f"{mod_name}.py"
        tree = parse_module(text, path)
        assert isinstance(tree, Ast), tree
        trees.append(tree)
        sources[path] = text
    program = lower_program(trees)
    result = callgraph.build(program, name, options or callgraph.AnalysisOptions())
    graph = build_dataflow_graph(result)
    return result, graph, sources


def analyze_fixture(*parts, options=None, siblings=()):
    path = fixture_path(*parts)
    sources = {path: open(path, encoding="utf-8").read()}
    trees = [parse_module(sources[path], path)]
    for sib in siblings:
        sib_path = fixture_path(*sib)
        sources[sib_path] = open(sib_path, encoding="utf-8").read()
        trees.append(parse_module(sources[sib_path], sib_path))
    program = lower_program(trees)
    entry = os.path.basename(path)[:-3]
    result = callgraph.build(program, entry, options or callgraph.AnalysisOptions())
    graph = build_dataflow_graph(result)
    return result, graph, sources


_NAMES = ["fit", "run", "map", "score", "pack", "emit", "step", "load"]


def random_chain_source(rng: random.Random):
    """A random chained-call program over one opaque import.  Returns
    (source, expected_path, reads_var_names, callback_proc_name)."""
    depth = rng.randint(1, 5)
    names = [rng.choice(_NAMES) for _ in range(depth)]
    chain = "seed" + "".join(f".{n}()" for n in names)
    lines = ["import base", "seed = base", f"value = {chain}"]
    n_reads = rng.randint(1, 3)
    read_vars = []
    for i in range(n_reads):
        field = rng.choice(["meta", "shape", "raw", "info"])
        lines.append(f"r{i} = value.{field}")
        read_vars.append(f"r{i}")
    lines.append("def watcher(event):")
    lines.append("    return event")
    lines.append("value.subscribe(watcher)")
    source = "\n".join(lines) + "\n"
    expected = ("base",) + tuple(names)
    return source, expected, read_vars, "watcher"


def random_dag(rng: random.Random, max_nodes: int = 50):
    """Random DAG as (n, edges) with edges oriented low -> high."""
    n = rng.randint(1, max_nodes)
    edges = set()
    for j in range(1, n):
        for i in range(j):
            if rng.random() < min(0.25, 4.0 / max(j, 1)):
                edges.add((i, j))
    return n, sorted(edges)


def brute_force_backward(n: int, edges, target: int) -> set:
    """Independent oracle: recursive DFS over explicitly reversed edges."""
    reverse = {}
    for s, d in edges:
        reverse.setdefault(d, []).append(s)
    seen = set()

    def visit(node):
        if node in seen:
            return
        seen.add(node)
        for pred in reverse.get(node, ()):
            visit(pred)

    visit(target)
    return seen
