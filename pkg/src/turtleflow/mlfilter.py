"""Reduce a dataflow graph to its ML-pipeline skeleton.

Keeps turtle-call results rooted in the target ML libraries, plus any
connector node lying on a directed path between two kept nodes (so a
dataset-flow chain like read_csv -> fit survives).  Location bookkeeping
(source spans) is stripped from exports; provenance back to the original
node ids is retained on the filtered graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dfg import (
    ARGUMENT_FLOW,
    DataflowGraph,
    DfEdge,
    DfNode,
    export_dot,
    export_json,
)

__all__ = ["MlFilterConfig", "FilteredGraph", "is_ml_node", "filter_graph",
           "export_filtered_json", "export_filtered_dot", "DEFAULT_ROOTS"]

DEFAULT_ROOTS = frozenset({"sklearn", "xgboost", "lightgbm"})


@dataclass(frozen=True)
class MlFilterConfig:
    target_roots: frozenset[str] = DEFAULT_ROOTS
    keep_argument_edges: bool = True

    def __post_init__(self):
        if not self.target_roots or any(not r for r in self.target_roots):
            raise ValueError("target_roots must be a nonempty set of nonempty prefixes")


@dataclass
class FilteredGraph:
    graph: DataflowGraph
    provenance: dict[int, int] = field(default_factory=dict)  # new id -> original id


def _path_matches_root(path: tuple[str, ...], root: str) -> bool:
    dotted = ".".join(path)
    return dotted == root or dotted.startswith(root + ".")


def is_ml_node(node: DfNode, cfg: MlFilterConfig) -> bool:
    """True iff the node is a turtle call result whose resolved import path
    is rooted in one of the target libraries."""
    if node.kind != "TurtleResult" or node.path is None:
        return False
    return any(_path_matches_root(node.path, root) for root in cfg.target_roots)


def filter_graph(g: DataflowGraph, cfg: MlFilterConfig | None = None) -> FilteredGraph:
    cfg = cfg or MlFilterConfig()
    kept = {n.id for n in g.nodes if is_ml_node(n, cfg)}
    # Foreign-library calls are removed outright; only non-turtle nodes
    # (local dataflow glue) may survive as connectors, so reachability runs
    # on the turtle-pruned subgraph.
    excluded = {n.id for n in g.nodes if n.kind == "TurtleResult" and n.id not in kept}
    edges = [
        e for e in g.edges
        if (cfg.keep_argument_edges or e.kind != ARGUMENT_FLOW)
        and e.src not in excluded
        and e.dst not in excluded
    ]
    succs: dict[int, list[int]] = {}
    preds: dict[int, list[int]] = {}
    for e in edges:
        succs.setdefault(e.src, []).append(e.dst)
        preds.setdefault(e.dst, []).append(e.src)

    def reach(start: set[int], adjacency: dict[int, list[int]]) -> set[int]:
        seen = set(start)
        work = list(start)
        while work:
            for nxt in adjacency.get(work.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    work.append(nxt)
        return seen

    from_kept = reach(kept, succs)
    to_kept = reach(kept, preds)
    connectors = (from_kept & to_kept) - kept
    final = kept | connectors

    ordered = sorted(final)
    remap = {old: new for new, old in enumerate(ordered)}
    nodes = []
    for old in ordered:
        n = g.node(old)
        nodes.append(
            DfNode(
                id=remap[old],
                kind=n.kind,
                label=n.label,
                span=n.span,
                enclosing_proc=n.enclosing_proc,
                context=n.context,
                path=n.path,
                receiver_path=n.receiver_path,
            )
        )
    kept_edges = sorted(
        {
            DfEdge(remap[e.src], remap[e.dst], e.kind)
            for e in edges
            if e.src in final and e.dst in final
        },
        key=lambda e: (e.src, e.dst, e.kind),
    )
    filtered = DataflowGraph(
        nodes=nodes,
        edges=list(kept_edges),
        entry=g.entry,
        digest=g.digest,
        import_origins=dict(g.import_origins),
    )
    return FilteredGraph(graph=filtered, provenance={remap[old]: old for old in ordered})


def export_filtered_json(f: FilteredGraph) -> str:
    # Location bookkeeping is dropped from the exported form.
    return export_json(f.graph, include_locations=False)


def export_filtered_dot(f: FilteredGraph) -> str:
    return export_dot(f.graph)
