"""turtleflow: static dataflow analysis of Python scripts under an
opaque-library ("turtle") abstraction.

Pipeline: source -> IR (frontend) -> call graph + points-to (callgraph)
-> dataflow graph (dfg) -> backward slices / completion examples (slicer)
and ML-pipeline filtering (mlfilter).  The cli module drives corpora.
"""

from .frontend import (
    Ast,
    AstCallRecord,
    Diagnostic,
    IrProgram,
    SourceSpan,
    collect_ast_calls,
    lower,
    lower_program,
    parse_module,
)
from .callgraph import (
    AnalysisBudgetError,
    AnalysisOptions,
    AnalysisResult,
    Turtle,
    build,
    import_value,
    resolve_turtle_inheritance,
    turtle_call,
    turtle_field_read,
)
from .dfg import DataflowGraph, DfEdge, DfNode, build_dataflow_graph, export_dot, export_json
from .mlfilter import FilteredGraph, MlFilterConfig, filter_graph, is_ml_node
from .slicer import (
    CompletionExample,
    backward_slice,
    enumerate_candidate_leaves,
    make_example,
    render_slice,
)

__all__ = [
    "Ast",
    "AstCallRecord",
    "Diagnostic",
    "IrProgram",
    "SourceSpan",
    "collect_ast_calls",
    "lower",
    "lower_program",
    "parse_module",
    "AnalysisBudgetError",
    "AnalysisOptions",
    "AnalysisResult",
    "Turtle",
    "build",
    "import_value",
    "resolve_turtle_inheritance",
    "turtle_call",
    "turtle_field_read",
    "DataflowGraph",
    "DfEdge",
    "DfNode",
    "build_dataflow_graph",
    "export_dot",
    "export_json",
    "FilteredGraph",
    "MlFilterConfig",
    "filter_graph",
    "is_ml_node",
    "CompletionExample",
    "backward_slice",
    "enumerate_candidate_leaves",
    "make_example",
    "render_slice",
]

__version__ = "0.1.0"
