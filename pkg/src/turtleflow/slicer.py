"""Backward slices over the dataflow graph and completion-example assembly.

A prediction point is a call-like leaf: a node with no outgoing edges and
at least one incoming edge (depth >= 1 once edges are reversed).  Leaves
that are plain expressions are ignored.  From a leaf, the slice is the set
of nodes that reach it, rendered back to source: maximal expressions only,
in source order, with variable names reattached from the enclosing
assignment and with the first line of each import statement that fed a
sliced library call.

Tokenization uses the standard library ``tokenize`` module, collecting
what was tokenized so far when the (typically truncated, hence malformed)
prefix trips the tokenizer.
"""

from __future__ import annotations

import io
import tokenize
from dataclasses import dataclass

from .dfg import DataflowGraph
from .frontend import Ast, SourceSpan, parse_module

import ast as pyast

__all__ = [
    "CompletionExample",
    "SliceIntegrityError",
    "enumerate_candidate_leaves",
    "backward_slice",
    "render_slice",
    "make_example",
    "SLICE_SEPARATOR",
    "CALL_LIKE_KINDS",
]

SLICE_SEPARATOR = "# <SLICE>"
CALL_LIKE_KINDS = frozenset({"CallResult", "TurtleResult"})


class SliceIntegrityError(Exception):
    """A slice span fell outside its source file: a frontend bug."""


@dataclass(frozen=True)
class CompletionExample:
    file: str
    target_span: SourceSpan  # the masked callee name
    label: str
    complete: str
    slice: str
    combined: str
    n_tokens: int


# ---------------------------------------------------------------------------
# Leaves and reachability
# ---------------------------------------------------------------------------


def enumerate_candidate_leaves(g: DataflowGraph) -> list[int]:
    """Call-like nodes with no out-edges and at least one in-edge."""
    has_out: set[int] = set()
    has_in: set[int] = set()
    for e in g.edges:
        has_out.add(e.src)
        has_in.add(e.dst)
    return [
        n.id
        for n in g.nodes
        if n.kind in CALL_LIKE_KINDS and n.id not in has_out and n.id in has_in
    ]


def backward_slice(g: DataflowGraph, target: int) -> set[int]:
    """All nodes backward-reachable from ``target`` over both edge kinds,
    including the target itself."""
    if target < 0 or target >= len(g.nodes):
        raise KeyError(f"unknown node id {target}")
    preds: dict[int, list[int]] = {}
    for e in g.edges:
        preds.setdefault(e.dst, []).append(e.src)
    seen = {target}
    work = [target]
    while work:
        node = work.pop()
        for pred in preds.get(node, ()):
            if pred not in seen:
                seen.add(pred)
                work.append(pred)
    return seen


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


class _FileIndex:
    """Per-file helpers: line access, offsets, assignment targets."""

    def __init__(self, path: str, source: str):
        self.path = path
        self.source = source
        self.lines = source.splitlines()
        tree = parse_module(source, path)
        self.ast: Ast | None = tree if isinstance(tree, Ast) else None
        # Span of an assignment's value -> its single Name target, if any.
        self.assign_targets: dict[tuple, str] = {}
        self.calls_by_span: dict[tuple, pyast.Call] = {}
        if self.ast is not None:
            for node in pyast.walk(self.ast.tree):
                if isinstance(node, pyast.Assign) and len(node.targets) == 1:
                    target = node.targets[0]
                    if isinstance(target, pyast.Name):
                        value_span = self.ast.span_of(node.value)
                        self.assign_targets[value_span.start + value_span.end] = target.id
                elif isinstance(node, pyast.Call):
                    span = self.ast.span_of(node)
                    self.calls_by_span[span.start + span.end] = node

    def check(self, span: SourceSpan):
        if span.start_line < 1 or span.end_line > len(self.lines):
            raise SliceIntegrityError(f"span {span} outside {self.path}")

    def first_line_of(self, span: SourceSpan) -> str:
        self.check(span)
        if span.start_line == span.end_line:
            return self.lines[span.start_line - 1][span.start_col - 1 : span.end_col]
        return self.lines[span.start_line - 1][span.start_col - 1 :]

    def full_line(self, line: int) -> str:
        return self.lines[line - 1].strip()

    def var_target(self, span: SourceSpan) -> str | None:
        return self.assign_targets.get(span.start + span.end)

    def callee_name_span(self, span: SourceSpan) -> SourceSpan | None:
        call = self.calls_by_span.get(span.start + span.end)
        if call is None or self.ast is None:
            return None
        func = call.func
        if isinstance(func, pyast.Attribute):
            return SourceSpan(
                self.path,
                func.end_lineno,
                func.end_col_offset - len(func.attr) + 1,
                func.end_lineno,
                func.end_col_offset,
            )
        if isinstance(func, pyast.Name):
            return self.ast.span_of(func)
        return None

    def offset(self, line: int, col: int) -> int:
        """Offset of 1-based (line, col) into the source text."""
        total = 0
        for i in range(line - 1):
            total += len(self.lines[i]) + 1
        return total + (col - 1)


def _indexes(sources: dict[str, str]) -> dict[str, _FileIndex]:
    return {path: _FileIndex(path, text) for path, text in sources.items()}


def _keep_maximal(spans: list[SourceSpan]) -> list[SourceSpan]:
    """Drop spans strictly contained in another span of the set."""
    unique = sorted(set(spans), key=lambda s: (s.file, s.start, (-s.end[0], -s.end[1])))
    kept: list[SourceSpan] = []
    for span in unique:
        if any(other.strictly_contains(span) for other in kept):
            continue
        kept.append(span)
    return kept


def _slice_entries(
    g: DataflowGraph,
    slice_nodes: set[int],
    indexes: dict[str, _FileIndex],
) -> list[tuple[str, int, int, SourceSpan | None]]:
    """(file, line, col, span-or-None) entries; None spans are import lines."""
    nodes = [g.node(i) for i in sorted(slice_nodes)]
    spans = []
    import_lines: set[tuple[str, int]] = set()
    for node in nodes:
        if node.kind == "Param":
            continue  # parameters have no renderable expression of their own
        if node.span.file in indexes:
            spans.append(node.span)
        if node.receiver_path is not None:
            origin = g.import_origins.get(node.receiver_path)
            if origin is not None and origin[0] in indexes:
                import_lines.add(origin)
    entries: list[tuple[str, int, int, SourceSpan | None]] = []
    for span in _keep_maximal(spans):
        entries.append((span.file, span.start_line, span.start_col, span))
    for file, line in import_lines:
        entries.append((file, line, 1, None))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    return entries


def _render_entry(
    entry: tuple[str, int, int, SourceSpan | None],
    indexes: dict[str, _FileIndex],
    mask_span: SourceSpan | None = None,
) -> str:
    file, line, _col, span = entry
    index = indexes[file]
    if span is None:
        return index.full_line(line)
    if mask_span is not None and span.contains(mask_span):
        # Prediction point: the physical source line up to the masked
        # callee name, then "?".
        index.check(mask_span)
        raw = index.lines[mask_span.start_line - 1][: mask_span.start_col - 1]
        return raw + "?"
    text = index.first_line_of(span)
    var = index.var_target(span)
    if var is not None:
        return f"{var} = {text}"
    return text


def render_slice(
    g: DataflowGraph,
    slice_nodes: set[int],
    sources: dict[str, str],
    mask_span: SourceSpan | None = None,
) -> str:
    """Render a slice as ordered source expressions, one line each.

    With ``mask_span`` set, the expression containing it is truncated at
    the mask and suffixed with "?" (the prediction-point form).
    """
    indexes = _indexes(sources)
    entries = _slice_entries(g, slice_nodes, indexes)
    rendered = [_render_entry(e, indexes, mask_span) for e in entries]
    return "\n".join(rendered)


# ---------------------------------------------------------------------------
# Completion examples
# ---------------------------------------------------------------------------


def _tokens_before(source: str, stop: tuple[int, int]) -> list[tokenize.TokenInfo]:
    """Tokens strictly before 0-based position ``stop``; on tokenizer errors
    (expected for arbitrary prefixes) returns what was tokenized so far."""
    kept: list[tokenize.TokenInfo] = []
    try:
        for tok in tokenize.generate_tokens(io.StringIO(source).readline):
            if tok.start >= stop:
                break
            if tok.type == tokenize.ENDMARKER:
                continue
            kept.append(tok)
    except (tokenize.TokenError, IndentationError, SyntaxError):
        pass
    return kept


def make_example(
    g: DataflowGraph,
    target: int,
    sources: dict[str, str],
    n_tokens: int = 1024,
) -> CompletionExample | None:
    """Build the (complete, slice, combined, label) record for a candidate
    leaf.  Returns None when the prefix yields no tokens (skipped, counted
    by the caller)."""
    node = g.node(target)
    indexes = _indexes(sources)
    index = indexes.get(node.span.file)
    if index is None:
        raise SliceIntegrityError(f"no source for {node.span.file}")
    name_span = index.callee_name_span(node.span)
    if name_span is None:
        return None
    label = index.first_line_of(name_span)
    stop = (name_span.start_line, name_span.start_col - 1)
    toks = _tokens_before(index.source, stop)
    toks = toks[-n_tokens:] if len(toks) > n_tokens else toks
    if not toks:
        return None
    end = index.offset(name_span.start_line, name_span.start_col)

    def cut(window):
        begin = index.offset(window[0].start[0], window[0].start[1] + 1)
        return index.source[begin:end]

    complete = cut(toks)
    # Window edges can re-tokenize into a few extra NL/INDENT tokens; trim
    # until an independent recount of the emitted text fits the budget.
    while len(_tokens_before(complete, (1 << 30, 0))) > n_tokens:
        toks = toks[1:]
        if not toks:
            return None
        complete = cut(toks)
    slice_nodes = backward_slice(g, target)
    slice_text = render_slice(g, slice_nodes, sources, mask_span=name_span)
    combined = complete + "\n" + SLICE_SEPARATOR + "\n" + slice_text
    return CompletionExample(
        file=node.span.file,
        target_span=name_span,
        label=label,
        complete=complete,
        slice=slice_text,
        combined=combined,
        n_tokens=len(toks),
    )
