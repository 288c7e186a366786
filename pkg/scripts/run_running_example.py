#!/usr/bin/env python3
"""Drive the full pipeline on the bundled running example and print what
each stage produces: the dataflow graph, the candidate prediction points,
one backward slice, and the ML-filtered graph."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from turtleflow import callgraph
from turtleflow.dfg import build_dataflow_graph, export_dot
from turtleflow.frontend import lower_program, parse_module
from turtleflow.mlfilter import MlFilterConfig, export_filtered_dot, filter_graph
from turtleflow.slicer import enumerate_candidate_leaves, make_example

FIXTURE = os.path.join(
    os.path.dirname(__file__), "..", "tests", "fixtures",
    "running_example", "running_example.py",
)


def main():
    path = os.path.abspath(FIXTURE)
    source = open(path).read()
    program = lower_program([parse_module(source, path)])
    result = callgraph.build(program, "running_example")
    graph = build_dataflow_graph(result)

    print(f"analyzed {path}")
    print(f"  frames: {len(result.reachable_frames)}, restarts: {result.restarts_used}")
    print(f"  graph: {len(graph.nodes)} nodes / {len(graph.edges)} edges")

    leaves = enumerate_candidate_leaves(graph)
    print(f"\ncandidate prediction points ({len(leaves)}):")
    for leaf in leaves:
        node = graph.node(leaf)
        print(f"  line {node.span.start_line:>3}  {node.label}")

    target = next(
        i for i in leaves
        if graph.node(i).label == "fit"
        and graph.node(i).enclosing_proc.endswith("<script>")
    )
    example = make_example(graph, target, {path: source})
    print(f"\nbackward slice for the line-{graph.node(target).span.start_line} fit call:")
    print(example.slice)

    filtered = filter_graph(graph, MlFilterConfig(target_roots=frozenset({"sklearn"})))
    print(f"\nsklearn-filtered graph ({len(filtered.graph.nodes)} nodes):")
    print(export_filtered_dot(filtered))

    out_dot = os.path.join(os.path.dirname(__file__), "running_example.dot")
    with open(out_dot, "w") as fh:
        fh.write(export_dot(graph))
    print(f"full graph DOT written to {out_dot}")


if __name__ == "__main__":
    main()
