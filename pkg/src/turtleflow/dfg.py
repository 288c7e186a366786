"""Interprocedural dataflow graph construction and DOT/JSON export.

The graph has one node per turtle call result, field read, and local
value-producing expression reachable in the call graph.  Variables are not
nodes: a variable is represented by its defining expression, so flow runs
producer-to-consumer.  Edges are ``ReceiverFlow`` (the black
receiver/producer chain) or ``ArgumentFlow`` (red non-receiver arguments).

Construction replays the finished analysis: points-to sets are fixed, so a
second monotone pass over reachable frames suffices and is a pure function
of the analysis result.  Turtle call results are keyed by produced path as
well as site, which keeps the chains through shared call sites apart (the
same textual ``model.fit`` site yields one node per receiver chain).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .callgraph import (
    AnalysisResult,
    BoundMethod,
    ClassObject,
    ContainerObject,
    ContextKey,
    CONTAINER_MUTATORS,
    DEFAULT_CONTEXT,
    ELEMENTS_FIELD,
    InstanceOf,
    ModuleInstance,
    ScriptInstance,
    Turtle,
    site_context,
)
from .frontend import (
    Assign,
    BinOp,
    CallOrNew,
    DISPLAY_OPS,
    FieldRead,
    FieldWrite,
    FreeRef,
    Reg,
    Return,
    SourceSpan,
    RETURN_REG,
)

__all__ = [
    "DfNode",
    "DfEdge",
    "DataflowGraph",
    "build_dataflow_graph",
    "export_dot",
    "export_json",
    "RECEIVER_FLOW",
    "ARGUMENT_FLOW",
    "NODE_KINDS",
]

RECEIVER_FLOW = "ReceiverFlow"
ARGUMENT_FLOW = "ArgumentFlow"

NODE_KINDS = ("TurtleResult", "CallResult", "FieldRead", "LocalExpr", "Param", "Const")
_KIND_ORDER = {k: i for i, k in enumerate(NODE_KINDS)}


@dataclass(frozen=True)
class DfNode:
    id: int
    kind: str
    label: str
    span: SourceSpan
    enclosing_proc: str
    context: ContextKey
    # Turtle provenance; drives ML filtering and slice import lines.
    path: tuple[str, ...] | None = None
    receiver_path: tuple[str, ...] | None = None


@dataclass(frozen=True)
class DfEdge:
    src: int
    dst: int
    kind: str


@dataclass
class DataflowGraph:
    nodes: list[DfNode]
    edges: list[DfEdge]
    entry: str
    digest: str
    import_origins: dict[tuple[str, ...], tuple[str, int]] = field(default_factory=dict)

    def out_edges(self, node_id: int) -> list[DfEdge]:
        return [e for e in self.edges if e.src == node_id]

    def in_edges(self, node_id: int) -> list[DfEdge]:
        return [e for e in self.edges if e.dst == node_id]

    def node(self, node_id: int) -> DfNode:
        return self.nodes[node_id]


# Internal node keys: everything that identifies a node, hashable and
# deterministically sortable.
_Key = tuple


def _normalize_label(text: str) -> str:
    return " ".join(text.split())


class _GraphBuilder:
    def __init__(self, result: AnalysisResult):
        self.result = result
        self.program = result.program
        self.pts = result.points_to
        self.reg_nodes: dict[tuple, set[_Key]] = {}
        self.content_nodes: dict[tuple, set[_Key]] = {}
        self.node_values: dict[_Key, set] = {}
        self.edges: set[tuple[_Key, _Key, str]] = set()
        self.keys: set[_Key] = set()
        self.changed = False
        self._local_names: dict[str, frozenset[str]] = {}

    # -- node helpers ----------------------------------------------------------

    def _key(
        self,
        kind: str,
        span: SourceSpan,
        proc: str,
        ctx: ContextKey,
        label: str,
        path: tuple[str, ...] | None = None,
        receiver_path: tuple[str, ...] | None = None,
    ) -> _Key:
        key = (kind, span, proc, ctx.sort_key(), label, path, receiver_path)
        if key not in self.keys:
            self.keys.add(key)
            self.changed = True
        return key

    def _add_value(self, key: _Key, values) -> None:
        target = self.node_values.setdefault(key, set())
        before = len(target)
        target.update(values)
        if len(target) != before:
            self.changed = True

    def _add_edge(self, src: _Key, dst: _Key, kind: str) -> None:
        edge = (src, dst, kind)
        if edge not in self.edges:
            self.edges.add(edge)
            self.changed = True

    def _add_reg(self, frame, reg: str, keys) -> None:
        target = self.reg_nodes.setdefault((frame, reg), set())
        before = len(target)
        target.update(keys)
        if len(target) != before:
            self.changed = True

    def _reg_keys(self, frame, op) -> set[_Key]:
        if isinstance(op, Reg):
            return self.reg_nodes.get((frame, op.name), set())
        if isinstance(op, FreeRef):
            return self._free_keys(frame, op.name)
        return set()

    def _free_keys(self, frame, name: str) -> set[_Key]:
        seen = set()
        found: set[_Key] = set()
        work = list(self.result.frame_parents.get(frame, ()))
        while work:
            anc = work.pop()
            if anc in seen:
                continue
            seen.add(anc)
            if name in self._locals_of(anc[0]):
                found |= self.reg_nodes.get((anc, name), set())
            else:
                work.extend(self.result.frame_parents.get(anc, ()))
        return found

    def _locals_of(self, proc_id: str) -> frozenset[str]:
        cached = self._local_names.get(proc_id)
        if cached is None:
            proc = self.program.proc(proc_id)
            names = set(proc.params)
            if proc.vararg:
                names.add(proc.vararg)
            if proc.kwarg:
                names.add(proc.kwarg)
            for ins in proc.instructions():
                if isinstance(ins, Assign) and not ins.result.startswith("%"):
                    names.add(ins.result)
            cached = frozenset(names)
            self._local_names[proc_id] = cached
        return cached

    def _filtered(self, keys: set[_Key], value) -> set[_Key]:
        return {k for k in keys if value in self.node_values.get(k, ())}

    def _text(self, span: SourceSpan) -> str:
        for module in self.program.modules.values():
            if module.path == span.file:
                return module.ast.text_of(span)
        return ""

    # -- replay ------------------------------------------------------------------

    def build(self) -> None:
        frames = self.result.reachable_frames
        while True:
            self.changed = False
            for frame in frames:
                proc = self.program.proc(frame[0])
                for ins in proc.instructions():
                    self._replay(frame, ins)
            self._bind_default_nodes()
            if not self.changed:
                return

    def _bind_default_nodes(self) -> None:
        for (proc_id, env), defaults in self.result.proc_defaults.items():
            if not defaults:
                continue
            for frame in self.result.frames_of_proc(proc_id):
                for param, op in defaults:
                    self._add_reg(frame, param, self._reg_keys(env, op))

    def _replay(self, frame, ins) -> None:
        proc_id = frame[0]
        ctx = frame[1]
        if isinstance(ins, Assign):
            self._add_reg(frame, ins.result, self._reg_keys(frame, ins.value))
        elif isinstance(ins, Return):
            self._add_reg(frame, RETURN_REG, self._reg_keys(frame, ins.value))
        elif isinstance(ins, BinOp):
            key = self._key(
                "LocalExpr", ins.span, proc_id, ctx, _normalize_label(self._text(ins.span))
            )
            edge_kind = ARGUMENT_FLOW if ins.op in DISPLAY_OPS else RECEIVER_FLOW
            operand_keys: set[_Key] = set()
            for op in ins.operands:
                operand_keys |= self._reg_keys(frame, op)
            for src in operand_keys:
                self._add_edge(src, key, edge_kind)
            self._add_reg(frame, ins.result, {key})
            self._add_value(key, self.pts.reg(frame, ins.result))
            if ins.op in DISPLAY_OPS:
                # Element nodes are also reachable through the container.
                for obj in self.pts.reg(frame, ins.result):
                    if isinstance(obj, ContainerObject):
                        target = self.content_nodes.setdefault((obj, ELEMENTS_FIELD), set())
                        before = len(target)
                        target.update(operand_keys)
                        if len(target) != before:
                            self.changed = True
        elif isinstance(ins, FieldRead):
            self._replay_read(frame, ins)
        elif isinstance(ins, FieldWrite):
            values = self._reg_keys(frame, ins.value)
            for obj in self._op_values(frame, ins.obj):
                if isinstance(obj, Turtle):
                    continue
                target = self.content_nodes.setdefault((obj, ins.field_name), set())
                before = len(target)
                target.update(values)
                if len(target) != before:
                    self.changed = True
        elif isinstance(ins, CallOrNew):
            self._replay_call(frame, ins)
        # Import, MakeFunction, MakeClass, Unsupported: no nodes.

    def _op_values(self, frame, op) -> set:
        if isinstance(op, Reg):
            return self.pts.reg(frame, op.name)
        if isinstance(op, FreeRef):
            return self._free_values_pts(frame, op.name)
        return set()

    def _replay_read(self, frame, ins: FieldRead) -> None:
        obj_keys = self._reg_keys(frame, ins.obj)
        obj_values = self._op_values(frame, ins.obj)
        if ins.mode == "callee":
            # Folded into the call node; receivers flow through.
            self._add_reg(frame, ins.result, obj_keys)
            return
        if ins.mode == "unpack":
            # Destructuring/iteration: transparent element extraction.
            passed: set[_Key] = set(obj_keys)
            for obj in obj_values:
                if isinstance(obj, ContainerObject):
                    passed |= self.content_nodes.get((obj, ELEMENTS_FIELD), set())
                elif isinstance(obj, (InstanceOf, ClassObject)):
                    passed |= self.content_nodes.get((obj, ins.field_name), set())
            self._add_reg(frame, ins.result, passed)
            return
        if ins.mode == "global":
            for obj in obj_values:
                if isinstance(obj, (ModuleInstance, ScriptInstance, ClassObject)):
                    self._add_reg(
                        frame, ins.result, self.content_nodes.get((obj, ins.field_name), set())
                    )
            return
        if not obj_values:
            return
        proc_id, ctx = frame
        converted = self.result.converted_reads
        for obj in sorted(obj_values, key=lambda v: str(v)):
            if isinstance(obj, Turtle):
                key = self._key(
                    "FieldRead", ins.span, proc_id, ctx, ins.field_name,
                    receiver_path=obj.path,
                )
                for src in self._filtered(obj_keys, obj):
                    self._add_edge(src, key, RECEIVER_FLOW)
                self._add_value(key, {obj})
                self._add_reg(frame, ins.result, {key})
            elif isinstance(obj, ContainerObject):
                key = self._key("FieldRead", ins.span, proc_id, ctx, ins.field_name)
                for src in self.content_nodes.get((obj, ELEMENTS_FIELD), set()):
                    self._add_edge(src, key, RECEIVER_FLOW)
                for src in self._filtered(obj_keys, obj):
                    self._add_edge(src, key, RECEIVER_FLOW)
                self._add_value(key, self.pts.reg(frame, ins.result))
                self._add_reg(frame, ins.result, {key})
            elif isinstance(obj, (InstanceOf, ClassObject, ModuleInstance, ScriptInstance)):
                contents: set[_Key] = set(self.content_nodes.get((obj, ins.field_name), set()))
                class_id = getattr(obj, "class_id", None)
                if isinstance(obj, InstanceOf):
                    for cid in self.result.user_mro(obj.class_id):
                        contents |= self.content_nodes.get(
                            (ClassObject(cid), ins.field_name), set()
                        )
                conv = converted.get((class_id, ins.field_name)) if class_id else None
                key = self._key("FieldRead", ins.span, proc_id, ctx, ins.field_name)
                if conv:
                    # Turtle-inherited read: value is the converted turtle and
                    # the edge follows the receiver, like an ordinary turtle read.
                    for src in self._filtered(obj_keys, obj):
                        self._add_edge(src, key, RECEIVER_FLOW)
                    self._add_value(key, conv)
                for src in contents:
                    self._add_edge(src, key, RECEIVER_FLOW)
                self._add_value(key, self.pts.reg(frame, ins.result))
                self._add_reg(frame, ins.result, {key})

    def _free_values_pts(self, frame, name: str) -> set:
        seen = set()
        values = set()
        work = list(self.result.frame_parents.get(frame, ()))
        while work:
            anc = work.pop()
            if anc in seen:
                continue
            seen.add(anc)
            if name in self._locals_of(anc[0]):
                values |= self.pts.reg(anc, name)
            else:
                work.extend(self.result.frame_parents.get(anc, ()))
        return values

    def _replay_call(self, frame, ins: CallOrNew) -> None:
        proc_id, ctx = frame
        outcomes = self.result.site_outcomes.get((frame, ins.site_id))
        if not outcomes:
            return
        callee_keys = self._reg_keys(frame, ins.callee)
        arg_ops = list(ins.args) + [op for _, op in ins.kwargs]
        for outcome in sorted(outcomes, key=lambda o: o.sort_key()):
            if outcome.kind == "turtle":
                key = self._key(
                    "TurtleResult",
                    ins.span,
                    proc_id,
                    site_context(ins.site_id),
                    ins.site_name,
                    path=outcome.result_path,
                    receiver_path=outcome.receiver_path,
                )
                receiver = Turtle(outcome.receiver_path)
                for src in self._filtered(callee_keys, receiver):
                    self._add_edge(src, key, RECEIVER_FLOW)
                for op in arg_ops:
                    for src in self._reg_keys(frame, op):
                        self._add_edge(src, key, ARGUMENT_FLOW)
                self._add_value(key, {Turtle(outcome.result_path)})
                self._add_reg(frame, ins.result, {key})
            elif outcome.kind == "identity":
                if ins.args:
                    self._add_reg(frame, ins.result, self._reg_keys(frame, ins.args[0]))
            elif outcome.kind == "container":
                container = outcome.receiver
                if outcome.builtin in CONTAINER_MUTATORS:
                    stored: set[_Key] = set()
                    for op in arg_ops:
                        stored |= self._reg_keys(frame, op)
                    target = self.content_nodes.setdefault((container, ELEMENTS_FIELD), set())
                    before = len(target)
                    target.update(stored)
                    if len(target) != before:
                        self.changed = True
                else:
                    self._add_reg(
                        frame, ins.result,
                        self.content_nodes.get((container, ELEMENTS_FIELD), set()),
                    )
            elif outcome.kind == "callback":
                callee = (outcome.proc, outcome.ctx)
                proc = self.program.proc(outcome.proc)
                params = list(proc.params)
                if isinstance(outcome.callback, BoundMethod) and params:
                    params = params[1:]
                for param in params:
                    pkey = self._key("Param", proc.span, outcome.proc, outcome.ctx, param)
                    self._add_value(pkey, {Turtle(outcome.result_path)})
                    self._add_reg(callee, param, {pkey})
            elif outcome.kind in ("user", "bound", "module_call", "new", "init", "alloc"):
                key = self._key("CallResult", ins.span, proc_id, ctx, ins.site_name)
                self._add_value(key, self.pts.reg(frame, ins.result))
                if outcome.kind in ("user", "bound", "module_call", "new"):
                    callee = (outcome.proc, outcome.ctx)
                    for src in self.reg_nodes.get((callee, RETURN_REG), set()):
                        self._add_edge(src, key, RECEIVER_FLOW)
                    self._bind_params(frame, ins, outcome, callee_keys, key)
                    self._add_reg(frame, ins.result, {key})
                elif outcome.kind == "init":
                    callee = (outcome.proc, outcome.ctx)
                    self._add_value(key, {outcome.instance})
                    self._bind_params(frame, ins, outcome, callee_keys, key, self_key=key)
                    self._add_reg(frame, ins.result, {key})
                else:  # alloc
                    self._add_value(key, {outcome.instance})
                    self._add_reg(frame, ins.result, {key})

    def _bind_params(self, frame, ins: CallOrNew, outcome, callee_keys, call_key, self_key=None):
        proc = self.program.proc(outcome.proc)
        callee = (outcome.proc, outcome.ctx)
        params = list(proc.params)
        arg_keys = [self._reg_keys(frame, op) for op in ins.args]
        if outcome.kind == "bound" and params:
            receiver_keys = self._filtered(callee_keys, outcome.receiver)
            self._add_reg(callee, params[0], receiver_keys)
            params = params[1:]
        elif outcome.kind == "init" and params:
            if self_key is not None:
                self._add_reg(callee, params[0], {self_key})
            params = params[1:]
        elif outcome.kind == "new" and params:
            params = params[1:]  # cls slot carries no data nodes
        for i, keys in enumerate(arg_keys):
            if i < len(params):
                self._add_reg(callee, params[i], keys)
            elif proc.vararg:
                self._add_reg(callee, proc.vararg, keys)
        for kw_name, op in ins.kwargs:
            keys = self._reg_keys(frame, op)
            if kw_name is not None and kw_name in proc.params:
                self._add_reg(callee, kw_name, keys)
            elif proc.kwarg:
                self._add_reg(callee, proc.kwarg, keys)

    # -- finalization ---------------------------------------------------------------

    def finalize(self, entry: str) -> DataflowGraph:
        def sort_key(key: _Key):
            kind, span, proc, ctx_key, label, path, receiver_path = key
            return (
                span.file,
                span.start,
                span.end,
                _KIND_ORDER[kind],
                label,
                tuple(path or ()),
                tuple(receiver_path or ()),
                ctx_key,
                proc,
            )

        ordered = sorted(self.keys, key=sort_key)
        ids = {key: i for i, key in enumerate(ordered)}
        nodes = []
        for key in ordered:
            kind, span, proc, ctx_key, label, path, receiver_path = key
            ctx = DEFAULT_CONTEXT if ctx_key[0] == "default" else site_context(ctx_key[1])
            nodes.append(
                DfNode(
                    id=ids[key],
                    kind=kind,
                    label=label,
                    span=span,
                    enclosing_proc=proc,
                    context=ctx,
                    path=path,
                    receiver_path=receiver_path,
                )
            )
        edges = sorted(
            {DfEdge(ids[s], ids[d], kind) for s, d, kind in self.edges},
            key=lambda e: (e.src, e.dst, e.kind),
        )
        entry_module = self.program.modules[entry]
        digest = hashlib.sha256(entry_module.source.encode("utf-8")).hexdigest()
        return DataflowGraph(
            nodes=nodes,
            edges=list(edges),
            entry=entry,
            digest=digest,
            import_origins=dict(self.result.import_origins),
        )


def build_dataflow_graph(result: AnalysisResult, program=None) -> DataflowGraph:
    """Materialize the dataflow graph from a finished analysis.  Pure and
    deterministic: identical inputs give identical node ids."""
    builder = _GraphBuilder(result)
    builder.build()
    return builder.finalize(result.entry)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def export_json(g: DataflowGraph, include_locations: bool = True) -> str:
    nodes = []
    for n in g.nodes:
        record = {
            "id": n.id,
            "kind": n.kind,
            "label": n.label,
            "proc": n.enclosing_proc,
        }
        if include_locations:
            record["file"] = n.span.file
            record["line"] = n.span.start_line
            record["col"] = n.span.start_col
        nodes.append(record)
    payload = {
        "nodes": nodes,
        "edges": [{"src": e.src, "dst": e.dst, "kind": e.kind} for e in g.edges],
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


_DOT_STYLES = {
    "TurtleResult": ' shape=box style=filled fillcolor="palegreen"',
    "FieldRead": ' shape=box style=filled fillcolor="lightblue"',
    "CallResult": " shape=box",
    "LocalExpr": " shape=ellipse",
    "Param": " shape=diamond",
    "Const": " shape=plaintext",
}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(g: DataflowGraph) -> str:
    lines = ["digraph dataflow {"]
    for n in g.nodes:
        style = _DOT_STYLES.get(n.kind, "")
        lines.append(f'  n{n.id} [label="{_dot_escape(n.label)}"{style}];')
    for e in g.edges:
        color = "black" if e.kind == RECEIVER_FLOW else "red"
        lines.append(f"  n{e.src} -> n{e.dst} [color={color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
