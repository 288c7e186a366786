"""Parsing and lowering of Python 3 source into a register-based IR.

The IR is deliberately small: every procedure (script body, function,
lambda, class body) becomes a CFG of basic blocks over a handful of
instruction kinds.  Two properties matter downstream:

* there is no separate "new" instruction -- object creation and function
  invocation are both ``CallOrNew`` and get disambiguated at analysis
  time by the receiver's abstract type;
* every instruction carries an exact source span, because slice
  extraction and call/AST matching are span-driven.

Variable accesses are resolved lexically here, once: locals become plain
registers, closed-over names become ``FreeRef`` operands, and globals
become synthetic field reads/writes on the enclosing module object
(``mode="global"``).  The analysis never re-derives scoping.
"""

from __future__ import annotations

import ast
import builtins
from dataclasses import dataclass, field

__all__ = [
    "SourceSpan",
    "Diagnostic",
    "Ast",
    "AstCallRecord",
    "parse_module",
    "collect_ast_calls",
    "lower",
    "lower_program",
    "IrProgram",
    "IrModule",
    "IrProcedure",
    "IrClass",
    "BasicBlock",
    "Reg",
    "FreeRef",
    "Const",
    "CallOrNew",
    "FieldRead",
    "FieldWrite",
    "Assign",
    "BinOp",
    "MakeFunction",
    "MakeClass",
    "Import",
    "Return",
    "Unsupported",
    "IDENTITY_BUILTINS",
    "PYTHON_BUILTINS",
    "GETITEM_FIELD",
    "MODULE_REG",
    "CLASS_SELF_REG",
    "RETURN_REG",
    "dump_ir",
]

# Builtins treated as identity-flow calls: the call resolves, and its value
# is its first argument.  Everything else in `builtins` is a no-op call.
IDENTITY_BUILTINS = frozenset(
    {"repr", "len", "print", "isinstance", "staticmethod", "classmethod"}
    | {n for n in dir(builtins) if n.endswith("Warning")}
)

PYTHON_BUILTINS = frozenset(dir(builtins))

GETITEM_FIELD = "__getitem__"

# Registers with reserved meaning inside a frame.
MODULE_REG = "@module"
CLASS_SELF_REG = "@class"
RETURN_REG = "@ret"


# ---------------------------------------------------------------------------
# Spans and parsing
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class SourceSpan:
    """1-based, inclusive source region.  ``end_col`` is the column of the
    last character (so ``line[start_col-1:end_col]`` slices a single-line
    span)."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    @property
    def start(self) -> tuple[int, int]:
        return (self.start_line, self.start_col)

    @property
    def end(self) -> tuple[int, int]:
        return (self.end_line, self.end_col)

    def contains(self, other: "SourceSpan") -> bool:
        return (
            self.file == other.file
            and self.start <= other.start
            and other.end <= self.end
        )

    def strictly_contains(self, other: "SourceSpan") -> bool:
        return self.contains(other) and (self.start, self.end) != (other.start, other.end)


@dataclass(frozen=True)
class Diagnostic:
    file: str
    line: int
    message: str


def _node_own_span(node: ast.AST, path: str) -> SourceSpan | None:
    if getattr(node, "lineno", None) is None or getattr(node, "end_lineno", None) is None:
        return None
    return SourceSpan(
        path,
        node.lineno,
        node.col_offset + 1,
        node.end_lineno,
        node.end_col_offset,
    )


class Ast:
    """A parsed module plus a span table.

    Spans are the *hull* of a node's own position and all descendant
    positions, which keeps the containment invariant (children nest in
    parents) even where CPython puts decorators outside the def's own
    range.
    """

    def __init__(self, path: str, source: str, tree: ast.Module):
        self.path = path
        self.source = source
        self.tree = tree
        self.lines = source.splitlines()
        self._spans: dict[int, SourceSpan] = {}
        self._hull(tree)

    def _hull(self, node: ast.AST) -> SourceSpan | None:
        span = _node_own_span(node, self.path)
        for child in ast.iter_child_nodes(node):
            child_span = self._hull(child)
            if child_span is None:
                continue
            if span is None:
                span = child_span
            else:
                span = SourceSpan(
                    self.path,
                    *min(span.start, child_span.start),
                    *max(span.end, child_span.end),
                )
        if span is not None:
            self._spans[id(node)] = span
        return span

    def span_of(self, node: ast.AST) -> SourceSpan:
        span = self._spans.get(id(node))
        if span is None:
            # Position-free node (e.g. an empty module): synthesize line 1.
            span = SourceSpan(self.path, 1, 1, 1, 1)
        return span

    def text_of(self, span: SourceSpan) -> str:
        if span.start_line == span.end_line:
            return self.lines[span.start_line - 1][span.start_col - 1 : span.end_col]
        parts = [self.lines[span.start_line - 1][span.start_col - 1 :]]
        parts.extend(self.lines[i] for i in range(span.start_line, span.end_line - 1))
        parts.append(self.lines[span.end_line - 1][: span.end_col])
        return "\n".join(parts)


@dataclass(frozen=True)
class AstCallRecord:
    span: SourceSpan
    callee_text: str
    simple_name: str


def parse_module(text: str | bytes, path: str) -> Ast | list[Diagnostic]:
    """Parse source text.  Returns an :class:`Ast` on success and a list of
    :class:`Diagnostic` on any failure; no partial trees."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            return [Diagnostic(path, 1, f"not valid UTF-8: {exc.reason}")]
    try:
        tree = ast.parse(text, filename=path)
        return Ast(path, text, tree)
    except SyntaxError as exc:
        return [Diagnostic(path, exc.lineno or 1, exc.msg or "syntax error")]
    except (ValueError, RecursionError) as exc:
        return [Diagnostic(path, 1, str(exc))]


def _callee_simple_name(func: ast.expr, text: str) -> str:
    if isinstance(func, ast.Attribute):
        return func.attr
    if isinstance(func, ast.Name):
        return func.id
    tail = text.rsplit(".", 1)[-1].strip()
    return tail if tail.isidentifier() else "<call>"


def collect_ast_calls(tree: Ast) -> list[AstCallRecord]:
    """One record per syntactic call expression, in source order (outer
    calls first when spans share a start)."""
    records = []
    for node in ast.walk(tree.tree):
        if isinstance(node, ast.Call):
            span = tree.span_of(node)
            func_text = tree.text_of(tree.span_of(node.func))
            records.append(
                AstCallRecord(span, func_text, _callee_simple_name(node.func, func_text))
            )
    records.sort(key=lambda r: (r.span.start, (-r.span.end_line, -r.span.end_col)))
    return records


# ---------------------------------------------------------------------------
# IR
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reg:
    name: str


@dataclass(frozen=True)
class FreeRef:
    """Read of a name bound in an enclosing function scope."""

    name: str


@dataclass(frozen=True)
class Const:
    text: str


Operand = Reg | FreeRef | Const


@dataclass
class CallOrNew:
    result: str
    callee: Operand
    site_name: str
    args: tuple[Operand, ...]
    kwargs: tuple[tuple[str | None, Operand], ...]
    site_id: str
    span: SourceSpan
    # Span of the callee name itself ("fit" in "obj.fit(x)"); prediction
    # points mask exactly this region.
    callee_name_span: SourceSpan | None
    # True for calls the lowering injects (decorator application) rather
    # than syntactic call expressions.
    synthetic: bool = False


@dataclass
class FieldRead:
    result: str
    obj: Operand
    field_name: str
    span: SourceSpan
    # "plain": syntactic attribute/subscript read (a dataflow node).
    # "callee": attribute read feeding a call's callee slot (folded into
    #           the call node downstream).
    # "global": synthetic read of a module-level name (transparent).
    mode: str = "plain"

    def site_key(self) -> str:
        s = self.span
        return f"{s.file}@{s.start_line}:{s.start_col}"


@dataclass
class FieldWrite:
    obj: Operand
    field_name: str
    value: Operand
    span: SourceSpan
    mode: str = "plain"  # "plain" | "global"


@dataclass
class Assign:
    result: str
    value: Operand
    span: SourceSpan


# Value-transparent n-ary ops: the result may hold the operands' values.
TRANSPARENT_OPS = frozenset({"or", "and", "ifexp"})
# Container displays: the result is an allocation-site container object
# holding the operand values as elements; operand edges are "contents
# being packed" and drawn as argument flow downstream.
DISPLAY_OPS = frozenset({"list", "tuple", "set", "dict"})


@dataclass
class BinOp:
    result: str
    op: str
    operands: tuple[Operand, ...]
    span: SourceSpan


@dataclass
class MakeFunction:
    result: str
    proc_id: str
    defaults: tuple[tuple[str, Operand], ...]
    span: SourceSpan


@dataclass
class MakeClass:
    result: str
    class_id: str
    bases: tuple[Operand, ...]
    span: SourceSpan


@dataclass
class Import:
    result: str
    dotted: str
    span: SourceSpan


@dataclass
class Return:
    value: Operand
    span: SourceSpan


@dataclass
class Unsupported:
    reason: str
    span: SourceSpan
    result: str | None = None


Instr = (
    CallOrNew
    | FieldRead
    | FieldWrite
    | Assign
    | BinOp
    | MakeFunction
    | MakeClass
    | Import
    | Return
    | Unsupported
)


@dataclass
class BasicBlock:
    index: int
    instrs: list[Instr] = field(default_factory=list)
    succs: list[int] = field(default_factory=list)


@dataclass
class IrProcedure:
    proc_id: str
    module_id: str
    name: str
    kind: str  # "script" | "function" | "lambda" | "classbody"
    params: tuple[str, ...]
    vararg: str | None
    kwarg: str | None
    lexical_parent: str | None
    span: SourceSpan
    blocks: list[BasicBlock] = field(default_factory=list)

    def instructions(self):
        for block in self.blocks:
            yield from block.instrs


@dataclass
class IrClass:
    class_id: str
    name: str
    body_proc: str
    span: SourceSpan


@dataclass
class IrModule:
    module_id: str
    path: str
    source: str
    lines: list[str]
    script_proc: str
    procedures: dict[str, IrProcedure]
    classes: dict[str, IrClass]
    assigned_globals: frozenset[str]
    ast: Ast


@dataclass
class IrProgram:
    modules: dict[str, IrModule]

    def module_of_proc(self, proc_id: str) -> IrModule:
        return self.modules[proc_id.split("::", 1)[0]]

    def proc(self, proc_id: str) -> IrProcedure:
        return self.module_of_proc(proc_id).procedures[proc_id]


# ---------------------------------------------------------------------------
# Scope analysis
# ---------------------------------------------------------------------------

_SCOPE_NODES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda, ast.ClassDef)


class _Scope:
    def __init__(self, node: ast.AST | None, kind: str, parent: "_Scope | None"):
        self.node = node
        self.kind = kind  # "module" | "function" | "class"
        self.parent = parent
        self.assigned: set[str] = set()
        self.globals_decl: set[str] = set()
        self.nonlocals_decl: set[str] = set()


def _collect_scope(scope: _Scope, body: list[ast.stmt] | ast.expr, scopes: dict[int, _Scope]):
    """Record names assigned in `scope` and recurse into nested scopes.

    Comprehension targets are folded into the enclosing function scope
    (comprehensions are desugared to loops during lowering).
    """

    def assign_target(t: ast.expr):
        if isinstance(t, ast.Name):
            scope.assigned.add(t.id)
        elif isinstance(t, (ast.Tuple, ast.List)):
            for e in t.elts:
                assign_target(e)
        elif isinstance(t, ast.Starred):
            assign_target(t.value)

    def walk(node: ast.AST):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            scope.assigned.add(node.name)
            sub = _Scope(node, "function", scope)
            scopes[id(node)] = sub
            for a in _all_args(node.args):
                sub.assigned.add(a)
            _collect_scope(sub, node.body, scopes)
            for d in node.decorator_list:
                walk(d)
            for dflt in node.args.defaults + [d for d in node.args.kw_defaults if d]:
                walk(dflt)
            return
        if isinstance(node, ast.Lambda):
            sub = _Scope(node, "function", scope)
            scopes[id(node)] = sub
            for a in _all_args(node.args):
                sub.assigned.add(a)
            _collect_scope(sub, node.body, scopes)
            for dflt in node.args.defaults + [d for d in node.args.kw_defaults if d]:
                walk(dflt)
            return
        if isinstance(node, ast.ClassDef):
            scope.assigned.add(node.name)
            sub = _Scope(node, "class", scope)
            scopes[id(node)] = sub
            _collect_scope(sub, node.body, scopes)
            for d in node.decorator_list + node.bases + [k.value for k in node.keywords]:
                walk(d)
            return
        if isinstance(node, ast.Global):
            scope.globals_decl.update(node.names)
            return
        if isinstance(node, ast.Nonlocal):
            scope.nonlocals_decl.update(node.names)
            return
        if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            scope.assigned.add(node.id)
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                if alias.name == "*":
                    continue
                scope.assigned.add(alias.asname or alias.name.split(".")[0])
        if isinstance(node, ast.ExceptHandler) and node.name:
            scope.assigned.add(node.name)
        for child in ast.iter_child_nodes(node):
            walk(child)

    if isinstance(body, list):
        for stmt in body:
            walk(stmt)
    else:
        walk(body)


def _all_args(args: ast.arguments) -> list[str]:
    names = [a.arg for a in args.posonlyargs + args.args + args.kwonlyargs]
    if args.vararg:
        names.append(args.vararg.arg)
    if args.kwarg:
        names.append(args.kwarg.arg)
    return names


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------


class _ProcBuilder:
    def __init__(self, proc: IrProcedure, scope: _Scope):
        self.proc = proc
        self.scope = scope
        self.temp_count = 0
        self.site_count = 0
        block = BasicBlock(0)
        proc.blocks.append(block)
        self.block = block

    def new_temp(self) -> str:
        self.temp_count += 1
        return f"%{self.temp_count}"

    def new_site(self) -> str:
        self.site_count += 1
        return f"{self.proc.proc_id}#s{self.site_count}"

    def emit(self, instr: Instr):
        self.block.instrs.append(instr)

    def new_block(self) -> BasicBlock:
        block = BasicBlock(len(self.proc.blocks))
        self.proc.blocks.append(block)
        return block

    def link(self, frm: BasicBlock, to: BasicBlock):
        if to.index not in frm.succs:
            frm.succs.append(to.index)


class _Lowerer:
    def __init__(self, tree: Ast, module_id: str):
        self.tree = tree
        self.module_id = module_id
        self.procedures: dict[str, IrProcedure] = {}
        self.classes: dict[str, IrClass] = {}
        self.scopes: dict[int, _Scope] = {}
        self.module_scope = _Scope(tree.tree, "module", None)
        _collect_scope(self.module_scope, tree.tree.body, self.scopes)
        self.lambda_count = 0

    # -- name classification -------------------------------------------------

    def _classify(self, scope: _Scope, name: str) -> str:
        """Return "local" | "free" | "global" | "classattr" for a read."""
        if scope.kind == "module":
            return "global"
        if scope.kind == "class":
            if name in scope.assigned:
                return "classattr"
            return self._classify_enclosing(scope.parent, name)
        if name in scope.globals_decl:
            return "global"
        if name in scope.nonlocals_decl:
            return "free"
        if name in scope.assigned:
            return "local"
        return self._classify_enclosing(scope.parent, name)

    def _classify_enclosing(self, scope: _Scope | None, name: str) -> str:
        while scope is not None:
            if scope.kind == "function" and name in scope.assigned and name not in scope.globals_decl:
                return "free"
            if scope.kind == "module":
                break
            scope = scope.parent
        return "global"

    # -- procedures -----------------------------------------------------------

    def lower_module(self) -> IrModule:
        script_id = f"{self.module_id}::<script>"
        proc = IrProcedure(
            proc_id=script_id,
            module_id=self.module_id,
            name="<script>",
            kind="script",
            params=(),
            vararg=None,
            kwarg=None,
            lexical_parent=None,
            span=self.tree.span_of(self.tree.tree),
        )
        self.procedures[script_id] = proc
        b = _ProcBuilder(proc, self.module_scope)
        self._lower_body(b, self.tree.tree.body)
        assigned = set(self.module_scope.assigned)
        for scope in self.scopes.values():
            assigned |= scope.globals_decl & scope.assigned
        return IrModule(
            module_id=self.module_id,
            path=self.tree.path,
            source=self.tree.source,
            lines=self.tree.lines,
            script_proc=script_id,
            procedures=self.procedures,
            classes=self.classes,
            assigned_globals=frozenset(assigned),
            ast=self.tree,
        )

    def _function_proc(
        self,
        node: ast.FunctionDef | ast.AsyncFunctionDef | ast.Lambda,
        b: _ProcBuilder,
        name: str,
        qual: str,
    ) -> tuple[str, tuple[tuple[str, Operand], ...]]:
        span = self.tree.span_of(node)
        proc_id = f"{self.module_id}::{qual}"
        scope = self.scopes[id(node)]
        kind = "lambda" if isinstance(node, ast.Lambda) else "function"
        args = node.args
        proc = IrProcedure(
            proc_id=proc_id,
            module_id=self.module_id,
            name=name,
            kind=kind,
            params=tuple(a.arg for a in args.posonlyargs + args.args + args.kwonlyargs),
            vararg=args.vararg.arg if args.vararg else None,
            kwarg=args.kwarg.arg if args.kwarg else None,
            lexical_parent=b.proc.proc_id,
            span=span,
        )
        self.procedures[proc_id] = proc
        sub = _ProcBuilder(proc, scope)
        if isinstance(node, ast.Lambda):
            value = self._expr(sub, node.body)
            sub.emit(Return(value, self.tree.span_of(node.body)))
        else:
            self._lower_body(sub, node.body)
        # Defaults are evaluated in the defining scope.
        defaults: list[tuple[str, Operand]] = []
        pos_params = [a.arg for a in args.posonlyargs + args.args]
        for param, dflt in zip(pos_params[len(pos_params) - len(args.defaults) :], args.defaults):
            defaults.append((param, self._expr(b, dflt)))
        for param, dflt in zip([a.arg for a in args.kwonlyargs], args.kw_defaults):
            if dflt is not None:
                defaults.append((param, self._expr(b, dflt)))
        return proc_id, tuple(defaults)

    # -- statements -----------------------------------------------------------

    def _lower_body(self, b: _ProcBuilder, body: list[ast.stmt]):
        for stmt in body:
            self._stmt(b, stmt)

    def _stmt(self, b: _ProcBuilder, node: ast.stmt):
        span = self.tree.span_of(node)
        if isinstance(node, ast.Expr):
            self._expr(b, node.value)
        elif isinstance(node, ast.Assign):
            self._lower_assign(b, node.targets, node.value, span)
        elif isinstance(node, ast.AnnAssign):
            if node.value is not None:
                self._lower_assign(b, [node.target], node.value, span)
        elif isinstance(node, ast.AugAssign):
            current = self._load_target(b, node.target)
            rhs = self._expr(b, node.value)
            t = b.new_temp()
            b.emit(BinOp(t, _op_name(node.op), (current, rhs), span))
            self._store(b, node.target, Reg(t), span)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            qual = self._qualify(b, node.name)
            proc_id, defaults = self._function_proc(node, b, node.name, qual)
            t = b.new_temp()
            b.emit(MakeFunction(t, proc_id, defaults, span))
            value = self._apply_decorators(b, node.decorator_list, Reg(t))
            self._store_name(b, node.name, value, span)
        elif isinstance(node, ast.ClassDef):
            self._lower_class(b, node, span)
        elif isinstance(node, ast.Return):
            value = self._expr(b, node.value) if node.value else Const("None")
            b.emit(Return(value, span))
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            self._lower_import(b, node, span)
        elif isinstance(node, ast.If):
            self._expr(b, node.test)
            before = b.block
            then_block = b.new_block()
            b.link(before, then_block)
            b.block = then_block
            self._lower_body(b, node.body)
            then_end = b.block
            else_block = b.new_block()
            b.link(before, else_block)
            b.block = else_block
            self._lower_body(b, node.orelse)
            else_end = b.block
            join = b.new_block()
            b.link(then_end, join)
            b.link(else_end, join)
            b.block = join
        elif isinstance(node, (ast.While,)):
            self._expr(b, node.test)
            before = b.block
            body_block = b.new_block()
            b.link(before, body_block)
            b.block = body_block
            self._lower_body(b, node.body)
            b.link(b.block, body_block)
            exit_block = b.new_block()
            b.link(before, exit_block)
            b.link(b.block, exit_block)
            b.block = exit_block
            self._lower_body(b, node.orelse)
        elif isinstance(node, (ast.For, ast.AsyncFor)):
            iter_val = self._expr(b, node.iter)
            element = self._unpack(b, iter_val, self.tree.span_of(node.target))
            self._store(b, node.target, element, self.tree.span_of(node.target))
            before = b.block
            body_block = b.new_block()
            b.link(before, body_block)
            b.block = body_block
            self._lower_body(b, node.body)
            b.link(b.block, body_block)
            exit_block = b.new_block()
            b.link(before, exit_block)
            b.link(b.block, exit_block)
            b.block = exit_block
            self._lower_body(b, node.orelse)
        elif isinstance(node, ast.Try):
            self._lower_body(b, node.body)
            for handler in node.handlers:
                if handler.type is not None:
                    self._expr(b, handler.type)
                if handler.name:
                    t = b.new_temp()
                    b.emit(Unsupported("exception binding", self.tree.span_of(handler), t))
                    self._store_name(b, handler.name, Reg(t), self.tree.span_of(handler))
                self._lower_body(b, handler.body)
            self._lower_body(b, node.orelse)
            self._lower_body(b, node.finalbody)
        elif isinstance(node, ast.With) or isinstance(node, ast.AsyncWith):
            for item in node.items:
                ctx = self._expr(b, item.context_expr)
                if item.optional_vars is not None:
                    self._store(b, item.optional_vars, ctx, self.tree.span_of(item.optional_vars))
            self._lower_body(b, node.body)
        elif isinstance(node, ast.Assert):
            self._expr(b, node.test)
            if node.msg is not None:
                self._expr(b, node.msg)
        elif isinstance(node, ast.Raise):
            if node.exc is not None:
                self._expr(b, node.exc)
            if node.cause is not None:
                self._expr(b, node.cause)
        elif isinstance(node, ast.Delete):
            b.emit(Unsupported("del", span))
        elif isinstance(node, (ast.Global, ast.Nonlocal, ast.Pass, ast.Break, ast.Continue)):
            pass
        else:
            # match statements and anything else outside the subset
            b.emit(Unsupported(type(node).__name__, span))

    def _lower_class(self, b: _ProcBuilder, node: ast.ClassDef, span: SourceSpan):
        qual = self._qualify(b, node.name)
        class_id = f"{self.module_id}::{qual}#class"
        body_id = f"{self.module_id}::{qual}.<classbody>"
        scope = self.scopes[id(node)]
        proc = IrProcedure(
            proc_id=body_id,
            module_id=self.module_id,
            name=f"{node.name}.<classbody>",
            kind="classbody",
            params=(),
            vararg=None,
            kwarg=None,
            lexical_parent=b.proc.proc_id,
            span=span,
        )
        self.procedures[body_id] = proc
        sub = _ProcBuilder(proc, scope)
        self._lower_body(sub, node.body)
        self.classes[class_id] = IrClass(class_id, node.name, body_id, span)
        bases = tuple(self._expr(b, base) for base in node.bases)
        if node.keywords:
            b.emit(Unsupported("class keywords (metaclass)", span))
        t = b.new_temp()
        b.emit(MakeClass(t, class_id, bases, span))
        value = self._apply_decorators(b, node.decorator_list, Reg(t))
        self._store_name(b, node.name, value, span)

    def _apply_decorators(self, b: _ProcBuilder, decorators: list[ast.expr], value: Operand) -> Operand:
        for dec in reversed(decorators):
            dec_op, site_name, name_span = self._callee(b, dec)
            t = b.new_temp()
            b.emit(
                CallOrNew(
                    t,
                    dec_op,
                    site_name,
                    (value,),
                    (),
                    b.new_site(),
                    self.tree.span_of(dec),
                    name_span,
                    synthetic=True,
                )
            )
            value = Reg(t)
        return value

    def _lower_import(self, b: _ProcBuilder, node: ast.Import | ast.ImportFrom, span: SourceSpan):
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.asname:
                    dotted, bound = alias.name, alias.asname
                else:
                    dotted, bound = alias.name.split(".")[0], alias.name.split(".")[0]
                t = b.new_temp()
                b.emit(Import(t, dotted, span))
                self._store_name(b, bound, Reg(t), span)
        else:
            base = node.module or ""
            for alias in node.names:
                if alias.name == "*":
                    b.emit(Unsupported("wildcard import", span))
                    continue
                dotted = f"{base}.{alias.name}" if base else alias.name
                t = b.new_temp()
                b.emit(Import(t, dotted, span))
                self._store_name(b, alias.asname or alias.name, Reg(t), span)

    # -- assignment -----------------------------------------------------------

    def _lower_assign(self, b: _ProcBuilder, targets: list[ast.expr], value: ast.expr, span: SourceSpan):
        # Tuple-to-tuple assignments of matching arity are split pairwise so
        # `X, y = d.data, d.target` keeps the two flows apart.
        if (
            len(targets) == 1
            and isinstance(targets[0], (ast.Tuple, ast.List))
            and isinstance(value, (ast.Tuple, ast.List))
            and len(targets[0].elts) == len(value.elts)
            and not any(isinstance(e, ast.Starred) for e in targets[0].elts)
        ):
            for t_elt, v_elt in zip(targets[0].elts, value.elts):
                self._lower_assign(b, [t_elt], v_elt, span)
            return
        op = self._expr(b, value)
        for target in targets:
            self._store(b, target, op, span)

    def _unpack(self, b: _ProcBuilder, value: Operand, span: SourceSpan) -> Operand:
        """Element extraction for iteration/destructuring: a transparent
        ``__getitem__`` read (no dataflow node of its own)."""
        t = b.new_temp()
        b.emit(FieldRead(t, value, GETITEM_FIELD, span, mode="unpack"))
        return Reg(t)

    def _store(self, b: _ProcBuilder, target: ast.expr, value: Operand, span: SourceSpan):
        if isinstance(target, ast.Name):
            self._store_name(b, target.id, value, self.tree.span_of(target))
        elif isinstance(target, ast.Attribute):
            obj = self._expr(b, target.value)
            b.emit(FieldWrite(obj, target.attr, value, self.tree.span_of(target)))
        elif isinstance(target, ast.Subscript):
            obj = self._expr(b, target.value)
            self._expr(b, target.slice)
            b.emit(FieldWrite(obj, GETITEM_FIELD, value, self.tree.span_of(target)))
        elif isinstance(target, (ast.Tuple, ast.List)):
            element = self._unpack(b, value, self.tree.span_of(target))
            for elt in target.elts:
                self._store(b, elt, element, span)
        elif isinstance(target, ast.Starred):
            self._store(b, target.value, value, span)
        else:
            b.emit(Unsupported(f"assignment target {type(target).__name__}", span))

    def _store_name(self, b: _ProcBuilder, name: str, value: Operand, span: SourceSpan):
        kind = self._classify(b.scope, name)
        if kind == "local":
            b.emit(Assign(name, value, span))
        elif kind == "classattr":
            b.emit(FieldWrite(Reg(CLASS_SELF_REG), name, value, span, mode="global"))
        elif kind == "free":
            b.emit(Unsupported(f"nonlocal store to {name}", span))
        else:
            b.emit(FieldWrite(Reg(MODULE_REG), name, value, span, mode="global"))

    def _load_target(self, b: _ProcBuilder, target: ast.expr) -> Operand:
        if isinstance(target, ast.Name):
            return self._load_name(b, target.id, self.tree.span_of(target))
        return self._expr(b, target)

    def _load_name(self, b: _ProcBuilder, name: str, span: SourceSpan) -> Operand:
        kind = self._classify(b.scope, name)
        if kind == "local":
            return Reg(name)
        if kind == "free":
            return FreeRef(name)
        if kind == "classattr":
            t = b.new_temp()
            b.emit(FieldRead(t, Reg(CLASS_SELF_REG), name, span, mode="global"))
            return Reg(t)
        t = b.new_temp()
        b.emit(FieldRead(t, Reg(MODULE_REG), name, span, mode="global"))
        return Reg(t)

    # -- expressions ----------------------------------------------------------

    def _qualify(self, b: _ProcBuilder, name: str) -> str:
        if b.proc.kind == "script":
            qual = name
        else:
            prefix = b.proc.proc_id.split("::", 1)[1]
            if prefix.endswith(".<classbody>"):
                prefix = prefix[: -len(".<classbody>")]
            qual = f"{prefix}.{name}"
        # Redefinitions of the same name (e.g. one class per branch) get
        # distinct ids.
        existing = {p.split("::", 1)[1] for p in self.procedures}
        existing |= {c.split("::", 1)[1].removesuffix("#class") for c in self.classes}
        if qual in existing or f"{qual}.<classbody>" in existing:
            n = 2
            while f"{qual}'{n}" in existing or f"{qual}'{n}.<classbody>" in existing:
                n += 1
            qual = f"{qual}'{n}"
        return qual

    def _callee(self, b: _ProcBuilder, func: ast.expr) -> tuple[Operand, str, SourceSpan | None]:
        """Lower a call's callee; attribute reads in callee position are
        marked so they fold into the call node downstream."""
        if isinstance(func, ast.Attribute):
            obj = self._expr(b, func.value)
            t = b.new_temp()
            span = self.tree.span_of(func)
            b.emit(FieldRead(t, obj, func.attr, span, mode="callee"))
            name_span = SourceSpan(
                span.file,
                func.end_lineno,
                func.end_col_offset - len(func.attr) + 1,
                func.end_lineno,
                func.end_col_offset,
            )
            return Reg(t), func.attr, name_span
        if isinstance(func, ast.Name):
            return (
                self._load_name(b, func.id, self.tree.span_of(func)),
                func.id,
                self.tree.span_of(func),
            )
        op = self._expr(b, func)
        text = self.tree.text_of(self.tree.span_of(func))
        return op, _callee_simple_name(func, text), None

    def _expr(self, b: _ProcBuilder, node: ast.expr) -> Operand:
        span = self.tree.span_of(node)
        if isinstance(node, ast.Constant):
            return Const(self.tree.text_of(span))
        if isinstance(node, ast.Name):
            return self._load_name(b, node.id, span)
        if isinstance(node, ast.Attribute):
            obj = self._expr(b, node.value)
            t = b.new_temp()
            b.emit(FieldRead(t, obj, node.attr, span))
            return Reg(t)
        if isinstance(node, ast.Subscript):
            obj = self._expr(b, node.value)
            self._expr(b, node.slice)
            t = b.new_temp()
            b.emit(FieldRead(t, obj, GETITEM_FIELD, span))
            return Reg(t)
        if isinstance(node, ast.Call):
            callee, site_name, name_span = self._callee(b, node.func)
            args = []
            for a in node.args:
                if isinstance(a, ast.Starred):
                    args.append(self._expr(b, a.value))
                else:
                    args.append(self._expr(b, a))
            kwargs = tuple((kw.arg, self._expr(b, kw.value)) for kw in node.keywords)
            t = b.new_temp()
            b.emit(CallOrNew(t, callee, site_name, tuple(args), kwargs, b.new_site(), span, name_span))
            return Reg(t)
        if isinstance(node, ast.BinOp):
            lhs = self._expr(b, node.left)
            rhs = self._expr(b, node.right)
            t = b.new_temp()
            b.emit(BinOp(t, _op_name(node.op), (lhs, rhs), span))
            return Reg(t)
        if isinstance(node, ast.UnaryOp):
            v = self._expr(b, node.operand)
            t = b.new_temp()
            b.emit(BinOp(t, f"unary{_op_name(node.op)}", (v,), span))
            return Reg(t)
        if isinstance(node, ast.Compare):
            ops = [self._expr(b, node.left)] + [self._expr(b, c) for c in node.comparators]
            t = b.new_temp()
            b.emit(BinOp(t, "cmp", tuple(ops), span))
            return Reg(t)
        if isinstance(node, ast.BoolOp):
            ops = tuple(self._expr(b, v) for v in node.values)
            t = b.new_temp()
            b.emit(BinOp(t, "or" if isinstance(node.op, ast.Or) else "and", ops, span))
            return Reg(t)
        if isinstance(node, ast.IfExp):
            self._expr(b, node.test)
            yes = self._expr(b, node.body)
            no = self._expr(b, node.orelse)
            t = b.new_temp()
            b.emit(BinOp(t, "ifexp", (yes, no), span))
            return Reg(t)
        if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
            ops = []
            for e in node.elts:
                ops.append(self._expr(b, e.value if isinstance(e, ast.Starred) else e))
            kind = {ast.List: "list", ast.Tuple: "tuple", ast.Set: "set"}[type(node)]
            t = b.new_temp()
            b.emit(BinOp(t, kind, tuple(ops), span))
            return Reg(t)
        if isinstance(node, ast.Dict):
            ops = []
            for k, v in zip(node.keys, node.values):
                if k is not None:
                    self._expr(b, k)
                ops.append(self._expr(b, v))
            t = b.new_temp()
            b.emit(BinOp(t, "dict", tuple(ops), span))
            return Reg(t)
        if isinstance(node, ast.Lambda):
            self.lambda_count += 1
            qual = self._qualify(b, f"<lambda@{span.start_line}:{span.start_col}>")
            proc_id, defaults = self._function_proc(node, b, "<lambda>", qual)
            t = b.new_temp()
            b.emit(MakeFunction(t, proc_id, defaults, span))
            return Reg(t)
        if isinstance(node, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            # Desugared to loops in the enclosing scope.
            for gen in node.generators:
                it = self._expr(b, gen.iter)
                element = self._unpack(b, it, self.tree.span_of(gen.target))
                self._store(b, gen.target, element, self.tree.span_of(gen.target))
                for cond in gen.ifs:
                    self._expr(b, cond)
            if isinstance(node, ast.DictComp):
                self._expr(b, node.key)
                elt = self._expr(b, node.value)
            else:
                elt = self._expr(b, node.elt)
            t = b.new_temp()
            b.emit(BinOp(t, "list", (elt,), span))
            return Reg(t)
        if isinstance(node, ast.JoinedStr):
            ops = []
            for v in node.values:
                if isinstance(v, ast.FormattedValue):
                    ops.append(self._expr(b, v.value))
            t = b.new_temp()
            b.emit(BinOp(t, "fstring", tuple(ops), span))
            return Reg(t)
        if isinstance(node, ast.FormattedValue):
            return self._expr(b, node.value)
        if isinstance(node, ast.NamedExpr):
            value = self._expr(b, node.value)
            self._store(b, node.target, value, span)
            return value
        if isinstance(node, ast.Starred):
            return self._expr(b, node.value)
        if isinstance(node, ast.Await):
            return self._expr(b, node.value)
        if isinstance(node, ast.Slice):
            for part in (node.lower, node.upper, node.step):
                if part is not None:
                    self._expr(b, part)
            return Const("<slice>")
        if isinstance(node, (ast.Yield, ast.YieldFrom)):
            if node.value is not None:
                self._expr(b, node.value)
            t = b.new_temp()
            b.emit(Unsupported("yield", span, t))
            return Reg(t)
        t = b.new_temp()
        b.emit(Unsupported(type(node).__name__, span, t))
        return Reg(t)


_OP_NAMES = {
    ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/", ast.FloorDiv: "//",
    ast.Mod: "%", ast.Pow: "**", ast.LShift: "<<", ast.RShift: ">>",
    ast.BitOr: "|", ast.BitXor: "^", ast.BitAnd: "&", ast.MatMult: "@",
    ast.UAdd: "+", ast.USub: "-", ast.Not: "!", ast.Invert: "~",
}


def _op_name(op: ast.operator | ast.unaryop) -> str:
    return _OP_NAMES.get(type(op), "?")


def lower(tree: Ast, module_id: str | None = None) -> IrModule:
    """Lower a parsed module.  Never fails on a well-formed Ast; constructs
    outside the supported subset become ``Unsupported`` instructions."""
    if module_id is None:
        module_id = _module_id_for_path(tree.path)
    return _Lowerer(tree, module_id).lower_module()


def lower_program(trees: list[Ast]) -> IrProgram:
    modules = {}
    for tree in trees:
        mod = lower(tree)
        modules[mod.module_id] = mod
    return IrProgram(modules)


def _module_id_for_path(path: str) -> str:
    stem = path.replace("\\", "/").rsplit("/", 1)[-1]
    if stem.endswith(".py"):
        stem = stem[:-3]
    return stem


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------


def _operand_str(op: Operand) -> str:
    if isinstance(op, Reg):
        return op.name
    if isinstance(op, FreeRef):
        return f"free({op.name})"
    return f"const({op.text})"


def dump_ir(program: IrProgram) -> str:
    """Stable textual IR form for --dump-ir."""
    out = []
    for mod_id in sorted(program.modules):
        mod = program.modules[mod_id]
        out.append(f"module {mod_id} ({mod.path})")
        for proc_id in sorted(mod.procedures):
            proc = mod.procedures[proc_id]
            params = ", ".join(proc.params)
            out.append(f"  proc {proc_id} [{proc.kind}] ({params})")
            for block in proc.blocks:
                succs = ",".join(str(s) for s in block.succs)
                out.append(f"    block {block.index} -> [{succs}]")
                for ins in block.instrs:
                    out.append(f"      {_instr_str(ins)}")
    return "\n".join(out) + "\n"


def _instr_str(ins: Instr) -> str:
    loc = f"@{ins.span.start_line}:{ins.span.start_col}"
    if isinstance(ins, CallOrNew):
        args = ", ".join(_operand_str(a) for a in ins.args)
        kwargs = ", ".join(f"{k}={_operand_str(v)}" for k, v in ins.kwargs)
        allargs = ", ".join(x for x in (args, kwargs) if x)
        return f"{ins.result} = call {_operand_str(ins.callee)}<{ins.site_name}>({allargs}) {loc}"
    if isinstance(ins, FieldRead):
        return f"{ins.result} = read {_operand_str(ins.obj)}.{ins.field_name} [{ins.mode}] {loc}"
    if isinstance(ins, FieldWrite):
        return f"write {_operand_str(ins.obj)}.{ins.field_name} = {_operand_str(ins.value)} [{ins.mode}] {loc}"
    if isinstance(ins, Assign):
        return f"{ins.result} = {_operand_str(ins.value)} {loc}"
    if isinstance(ins, BinOp):
        ops = ", ".join(_operand_str(o) for o in ins.operands)
        return f"{ins.result} = op[{ins.op}]({ops}) {loc}"
    if isinstance(ins, MakeFunction):
        return f"{ins.result} = func {ins.proc_id} {loc}"
    if isinstance(ins, MakeClass):
        bases = ", ".join(_operand_str(o) for o in ins.bases)
        return f"{ins.result} = class {ins.class_id}({bases}) {loc}"
    if isinstance(ins, Import):
        return f"{ins.result} = import {ins.dotted} {loc}"
    if isinstance(ins, Return):
        return f"return {_operand_str(ins.value)} {loc}"
    return f"unsupported[{ins.reason}] {loc}"
