"""Flow-insensitive interprocedural propagation with opaque library values.

Every library value is a *turtle*: an object named by the dotted path of
operations that produced it.  Four rules cover all library behavior:

1. importing an unanalyzed module yields a turtle named after it;
2. calling a turtle yields a fresh turtle with the call-site name appended
   to the path;
3. reading any field of a turtle yields the turtle itself;
4. function-valued arguments to turtle calls are invoked (callbacks), fed
   fresh turtles as their arguments.

User code is propagated with a subset-based, 0-CFA-style fixpoint; a single
unified ``CallOrNew`` dispatch covers creation, invocation, bound methods,
callable modules and turtles, per receiver value.  Synthetic turtle
methods are analyzed one context per call site.  Classes that inherit from
turtles get their never-assigned member reads converted to turtle reads
between restarts of the whole propagation.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field

from .frontend import (
    Assign,
    BinOp,
    CallOrNew,
    DISPLAY_OPS,
    FieldRead,
    FieldWrite,
    FreeRef,
    IDENTITY_BUILTINS,
    Import,
    IrProgram,
    MakeClass,
    MakeFunction,
    Operand,
    PYTHON_BUILTINS,
    Reg,
    Return,
    TRANSPARENT_OPS,
    CLASS_SELF_REG,
    MODULE_REG,
    RETURN_REG,
)

__all__ = [
    "ClassObject",
    "InstanceOf",
    "ModuleInstance",
    "ScriptInstance",
    "FunctionInstance",
    "BoundMethod",
    "BuiltinFunction",
    "ContainerObject",
    "ContainerMethod",
    "Turtle",
    "ContextKey",
    "DEFAULT_CONTEXT",
    "site_context",
    "CallGraph",
    "PointsTo",
    "Outcome",
    "PendingTurtleRead",
    "AnalysisOptions",
    "AnalysisBudgetError",
    "AnalysisResult",
    "TurtleCall",
    "turtle_call",
    "turtle_field_read",
    "import_value",
    "extend_turtle_path",
    "build",
    "resolve_turtle_inheritance",
    "dump_callgraph",
    "value_sort_key",
    "ROOT_PROC",
    "TURTLE_PROC",
    "TRUNCATION_MARK",
    "ELEMENTS_FIELD",
    "CONTAINER_MUTATORS",
    "CONTAINER_ACCESSORS",
]

ROOT_PROC = "<root>"
TURTLE_PROC = "<turtle>"
TRUNCATION_MARK = "…"


# ---------------------------------------------------------------------------
# Abstract values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContextKey:
    kind: str = "default"  # "default" | "site"
    site: str = ""

    def sort_key(self):
        return (self.kind, self.site)

    def __str__(self):
        return "default" if self.kind == "default" else f"site[{self.site}]"


DEFAULT_CONTEXT = ContextKey()


def site_context(site_id: str) -> ContextKey:
    return ContextKey("site", site_id)


FrameKey = tuple[str, ContextKey]  # (proc_id, context)


@dataclass(frozen=True)
class ClassObject:
    class_id: str


@dataclass(frozen=True)
class InstanceOf:
    class_id: str
    alloc_site: str


@dataclass(frozen=True)
class ModuleInstance:
    module_id: str


@dataclass(frozen=True)
class ScriptInstance:
    module_id: str


@dataclass(frozen=True)
class FunctionInstance:
    proc_id: str
    env: FrameKey | None


@dataclass(frozen=True)
class BoundMethod:
    func: FunctionInstance
    receiver: "Value"


@dataclass(frozen=True)
class BuiltinFunction:
    name: str


@dataclass(frozen=True)
class ContainerObject:
    """Allocation-site abstraction of a list/tuple/set/dict display; its
    elements live in a single synthetic field."""

    kind: str
    alloc_site: str


@dataclass(frozen=True)
class ContainerMethod:
    container: ContainerObject
    name: str


# Container methods modeled just enough for element flow.
CONTAINER_MUTATORS = frozenset(
    {"append", "add", "insert", "extend", "update", "push", "appendleft", "setdefault"}
)
CONTAINER_ACCESSORS = frozenset({"pop", "get", "popleft", "popitem"})
ELEMENTS_FIELD = "__elem__"


@dataclass(frozen=True)
class Turtle:
    path: tuple[str, ...]

    @property
    def display(self) -> str:
        return self.path[-1]

    def __str__(self):
        return "T(" + ".".join(self.path) + ")"


Value = (
    ClassObject
    | InstanceOf
    | ModuleInstance
    | ScriptInstance
    | FunctionInstance
    | BoundMethod
    | BuiltinFunction
    | ContainerObject
    | ContainerMethod
    | Turtle
)


def value_sort_key(v: Value) -> tuple:
    return (type(v).__name__, str(v))


# ---------------------------------------------------------------------------
# Turtle rules as standalone operations
# ---------------------------------------------------------------------------


def extend_turtle_path(path: tuple[str, ...], name: str, max_depth: int = 8) -> tuple[str, ...]:
    """Append a segment, truncating with an ellipsis segment at max_depth.
    Truncated paths absorb further extension, which bounds the value space."""
    if path and path[-1] == TRUNCATION_MARK:
        return path
    extended = path + (name,)
    if len(extended) > max_depth:
        return extended[: max_depth - 1] + (TRUNCATION_MARK,)
    return extended


@dataclass(frozen=True)
class TurtleCall:
    result: Turtle
    callbacks: tuple[Value, ...]


def turtle_call(receiver: Turtle, site_name: str, args: tuple = (), max_depth: int = 8) -> TurtleCall:
    """Calling a turtle mints a derived turtle; function-valued arguments
    are surfaced so the solver can generate callback edges."""
    result = Turtle(extend_turtle_path(receiver.path, site_name, max_depth))
    callbacks = tuple(a for a in args if isinstance(a, (FunctionInstance, BoundMethod)))
    return TurtleCall(result, callbacks)


def turtle_field_read(receiver: Turtle, field_name: str) -> Turtle:
    """Reading any field of a turtle returns the container itself."""
    return receiver


def import_value(dotted: str, program: IrProgram) -> ModuleInstance | Turtle:
    """Imports of analyzed source become module instances; everything else
    becomes a turtle named by the dotted path."""
    if dotted in program.modules:
        return ModuleInstance(dotted)
    return Turtle(tuple(dotted.split(".")))


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass
class CallGraph:
    root: FrameKey
    nodes: set[FrameKey] = field(default_factory=set)
    edges: dict[tuple[FrameKey, str], set[FrameKey]] = field(default_factory=dict)

    def add_edge(self, caller: FrameKey, site: str, callee: FrameKey) -> bool:
        self.nodes.add(caller)
        self.nodes.add(callee)
        targets = self.edges.setdefault((caller, site), set())
        if callee in targets:
            return False
        targets.add(callee)
        return True

    def callees(self, caller: FrameKey, site: str) -> set[FrameKey]:
        return self.edges.get((caller, site), set())

    def reachable_procs(self) -> set[str]:
        return {proc for proc, _ in self.nodes}


@dataclass
class PointsTo:
    registers: dict[tuple[FrameKey, str], set[Value]]
    fields: dict[tuple[Value, str], set[Value]]

    def reg(self, frame: FrameKey, name: str) -> set[Value]:
        return self.registers.get((frame, name), set())

    def field(self, obj: Value, field_name: str) -> set[Value]:
        return self.fields.get((obj, field_name), set())


@dataclass(frozen=True)
class Outcome:
    """One resolved behavior of a call site for one receiver value."""

    kind: str  # turtle | user | bound | init | new | alloc | module_call | callback | identity
    proc: str | None = None
    ctx: ContextKey | None = None
    receiver: Value | None = None
    receiver_path: tuple[str, ...] | None = None
    result_path: tuple[str, ...] | None = None
    class_id: str | None = None
    instance: Value | None = None
    builtin: str | None = None
    callback: Value | None = None

    def sort_key(self):
        return (self.kind, self.proc or "", str(self.receiver), str(self.callback))


@dataclass(frozen=True)
class PendingTurtleRead:
    site: str
    class_id: str
    field_name: str


class AnalysisBudgetError(Exception):
    def __init__(self, file: str, message: str):
        super().__init__(f"{file}: {message}")
        self.file = file


@dataclass(frozen=True)
class AnalysisOptions:
    user_context: str = "mono"  # "mono" | "site"
    turtle_depth: int = 8
    restart_cap: int = 10
    budget_secs: float = 30.0


@dataclass
class AnalysisResult:
    program: IrProgram
    entry: str
    options: AnalysisOptions
    call_graph: CallGraph
    points_to: PointsTo
    frame_parents: dict[FrameKey, set[FrameKey]]
    reachable_frames: tuple[FrameKey, ...]
    site_outcomes: dict[tuple[FrameKey, str], frozenset[Outcome]]
    proc_defaults: dict[tuple[str, FrameKey], tuple[tuple[str, Operand], ...]]
    converted_reads: dict[tuple[str, str], frozenset[Turtle]]
    class_bases: dict[str, frozenset[Value]]
    import_origins: dict[tuple[str, ...], tuple[str, int]]
    resolved_sites: frozenset[str]
    restarts_used: int
    unresolved_dispatches: int
    elapsed_secs: float

    def user_mro(self, class_id: str) -> list[str]:
        order: list[str] = []
        seen: set[str] = set()

        def visit(cid: str):
            if cid in seen:
                return
            seen.add(cid)
            order.append(cid)
            for base in sorted(self.class_bases.get(cid, ()), key=value_sort_key):
                if isinstance(base, ClassObject):
                    visit(base.class_id)

        visit(class_id)
        return order

    def outcomes_for_site(self, site_id: str) -> set[Outcome]:
        merged: set[Outcome] = set()
        for (_, site), outs in self.site_outcomes.items():
            if site == site_id:
                merged |= outs
        return merged

    def frames_of_proc(self, proc_id: str) -> list[FrameKey]:
        return [f for f in self.reachable_frames if f[0] == proc_id]


# ---------------------------------------------------------------------------
# The solver
# ---------------------------------------------------------------------------


class _Solver:
    def __init__(self, program: IrProgram, entry: str, options: AnalysisOptions):
        self.program = program
        self.entry = entry
        self.opts = options
        self.converted: dict[tuple[str, str], set[Turtle]] = {}
        self._local_names: dict[str, frozenset[str]] = {}
        self._deadline = 0.0
        self._started = 0.0

    # -- per-pass mutable state --------------------------------------------

    def _reset(self):
        self.registers: dict[tuple[FrameKey, str], set[Value]] = defaultdict(set)
        self.fields: dict[tuple[Value, str], set[Value]] = defaultdict(set)
        self.frames: set[FrameKey] = set()
        self.frame_parents: dict[FrameKey, set[FrameKey]] = defaultdict(set)
        self.class_bases: dict[str, set[Value]] = defaultdict(set)
        self.proc_defaults: dict[tuple[str, FrameKey], tuple[tuple[str, Operand], ...]] = {}
        self.outcomes: dict[tuple[FrameKey, str], set[Outcome]] = defaultdict(set)
        self.pending: set[PendingTurtleRead] = set()
        self.import_origins: dict[tuple[str, ...], tuple[str, int]] = {}
        self.cg = CallGraph(root=(ROOT_PROC, DEFAULT_CONTEXT))
        self.changed = False

    # -- helpers -------------------------------------------------------------

    def _check_budget(self):
        if time.monotonic() > self._deadline:
            path = self.program.modules[self.entry].path
            raise AnalysisBudgetError(path, f"analysis budget of {self.opts.budget_secs}s exceeded")

    def _module_value(self, module_id: str) -> ModuleInstance | ScriptInstance:
        if module_id == self.entry:
            return ScriptInstance(module_id)
        return ModuleInstance(module_id)

    def _local_names_of(self, proc_id: str) -> frozenset[str]:
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

    def _add_values(self, frame: FrameKey, reg: str, values) -> None:
        target = self.registers[(frame, reg)]
        before = len(target)
        target.update(values)
        if len(target) != before:
            self.changed = True

    def _add_field(self, obj: Value, field_name: str, values) -> None:
        target = self.fields[(obj, field_name)]
        before = len(target)
        target.update(values)
        if len(target) != before:
            self.changed = True

    def _values(self, frame: FrameKey, op: Operand) -> set[Value]:
        if isinstance(op, Reg):
            return self.registers.get((frame, op.name), set())
        if isinstance(op, FreeRef):
            return self._free_values(frame, op.name)
        return set()

    def _free_values(self, frame: FrameKey, name: str) -> set[Value]:
        # Union the name over every ancestor frame that binds it locally.
        seen: set[FrameKey] = set()
        result: set[Value] = set()
        work = list(self.frame_parents.get(frame, ()))
        while work:
            anc = work.pop()
            if anc in seen:
                continue
            seen.add(anc)
            if name in self._local_names_of(anc[0]):
                result |= self.registers.get((anc, name), set())
            else:
                work.extend(self.frame_parents.get(anc, ()))
        return result

    def _ensure_frame(self, frame: FrameKey, parent: FrameKey | None) -> None:
        if frame not in self.frames:
            self.frames.add(frame)
            self.changed = True
        proc = self.program.proc(frame[0])
        self._add_values(frame, MODULE_REG, {self._module_value(proc.module_id)})
        if parent is not None and parent not in self.frame_parents[frame]:
            self.frame_parents[frame].add(parent)
            self.changed = True

    def _record_outcome(self, frame: FrameKey, site: str, outcome: Outcome):
        outs = self.outcomes[(frame, site)]
        if outcome not in outs:
            outs.add(outcome)
            self.changed = True

    # -- class machinery -------------------------------------------------------

    def _mro(self, class_id: str) -> list[str]:
        order: list[str] = []
        seen: set[str] = set()

        def visit(cid: str):
            if cid in seen:
                return
            seen.add(cid)
            order.append(cid)
            for base in sorted(self.class_bases.get(cid, ()), key=value_sort_key):
                if isinstance(base, ClassObject):
                    visit(base.class_id)

        visit(class_id)
        return order

    def _turtle_bases(self, class_id: str) -> list[Turtle]:
        turtles: dict[tuple[str, ...], Turtle] = {}
        for cid in self._mro(class_id):
            for base in self.class_bases.get(cid, ()):
                if isinstance(base, Turtle):
                    turtles[base.path] = base
        return [turtles[p] for p in sorted(turtles)]

    def _class_member(self, class_id: str, field_name: str) -> set[Value]:
        found: set[Value] = set()
        for cid in self._mro(class_id):
            found |= self.fields.get((ClassObject(cid), field_name), set())
        return found

    def _field_assigned_anywhere(self, class_id: str, field_name: str) -> bool:
        mro = set(self._mro(class_id))
        for (obj, fname), values in self.fields.items():
            if fname != field_name or not values:
                continue
            if isinstance(obj, InstanceOf) and obj.class_id in mro:
                return True
            if isinstance(obj, ClassObject) and obj.class_id in mro:
                return True
        return False

    # -- instruction interpretation ---------------------------------------------

    def _run_pass(self):
        rounds = 0
        while True:
            self._check_budget()
            self.changed = False
            for frame in sorted(self.frames, key=lambda f: (f[0], f[1].sort_key())):
                proc = self.program.proc(frame[0])
                for ins in proc.instructions():
                    self._interp(frame, ins)
            rounds += 1
            if not self.changed:
                return

    def _interp(self, frame: FrameKey, ins) -> None:
        if isinstance(ins, Assign):
            self._add_values(frame, ins.result, self._values(frame, ins.value))
        elif isinstance(ins, FieldRead):
            self._interp_read(frame, ins)
        elif isinstance(ins, FieldWrite):
            values = self._values(frame, ins.value)
            if not values:
                return
            for obj in self._values(frame, ins.obj):
                if isinstance(obj, Turtle):
                    continue  # library state is not modeled
                field_name = ins.field_name
                if isinstance(obj, ContainerObject) and field_name == "__getitem__":
                    field_name = ELEMENTS_FIELD
                self._add_field(obj, field_name, values)
        elif isinstance(ins, CallOrNew):
            for value in self._values(frame, ins.callee):
                self._dispatch(frame, ins, value)
        elif isinstance(ins, BinOp):
            if ins.op in TRANSPARENT_OPS:
                merged: set[Value] = set()
                for op in ins.operands:
                    merged |= self._values(frame, op)
                self._add_values(frame, ins.result, merged)
            elif ins.op in DISPLAY_OPS:
                span = ins.span
                container = ContainerObject(
                    ins.op, f"{span.file}@{span.start_line}:{span.start_col}"
                )
                self._add_values(frame, ins.result, {container})
                elements: set[Value] = set()
                for op in ins.operands:
                    elements |= self._values(frame, op)
                if elements:
                    self._add_field(container, ELEMENTS_FIELD, elements)
        elif isinstance(ins, MakeFunction):
            fi = FunctionInstance(ins.proc_id, frame)
            self.proc_defaults[(ins.proc_id, frame)] = ins.defaults
            self._add_values(frame, ins.result, {fi})
        elif isinstance(ins, MakeClass):
            self._interp_make_class(frame, ins)
        elif isinstance(ins, Import):
            self._interp_import(frame, ins)
        elif isinstance(ins, Return):
            self._add_values(frame, RETURN_REG, self._values(frame, ins.value))
        # Unsupported: deliberate no-op.

    def _interp_read(self, frame: FrameKey, ins: FieldRead) -> None:
        name = ins.field_name
        result: set[Value] = set()
        for obj in self._values(frame, ins.obj):
            if isinstance(obj, Turtle):
                result.add(turtle_field_read(obj, name))
            elif isinstance(obj, ContainerObject):
                if name == "__getitem__":
                    result |= self.fields.get((obj, ELEMENTS_FIELD), set())
                elif name in CONTAINER_MUTATORS or name in CONTAINER_ACCESSORS:
                    result.add(ContainerMethod(obj, name))
            elif isinstance(obj, (ModuleInstance, ScriptInstance)):
                result |= self.fields.get((obj, name), set())
                if ins.mode == "global":
                    result |= self._global_fallback(obj.module_id, name)
            elif isinstance(obj, InstanceOf):
                result |= self._instance_member(obj, name, ins.site_key())
            elif isinstance(obj, ClassObject):
                found = self._class_member(obj.class_id, name)
                if found:
                    result |= found
                else:
                    result |= self._inherited_turtle_read(obj.class_id, name, ins.site_key())
        self._add_values(frame, ins.result, result)

    def _global_fallback(self, module_id: str, name: str) -> set[Value]:
        module = self.program.modules.get(module_id)
        if module is not None and name in module.assigned_globals:
            return set()
        if name in IDENTITY_BUILTINS:
            return {BuiltinFunction(name)}
        if name in PYTHON_BUILTINS:
            return set()
        # A name never bound in the program: an opaque library value.
        return {Turtle((name,))}

    def _instance_member(self, obj: InstanceOf, name: str, site: str) -> set[Value]:
        result = set(self.fields.get((obj, name), set()))
        for value in self._class_member(obj.class_id, name):
            if isinstance(value, FunctionInstance):
                result.add(BoundMethod(value, obj))
            else:
                result.add(value)
        if not result:
            result |= self._inherited_turtle_read(obj.class_id, name, site)
        return result

    def _inherited_turtle_read(self, class_id: str, name: str, site: str) -> set[Value]:
        converted = self.converted.get((class_id, name))
        if converted:
            return set(converted)
        if self._turtle_bases(class_id):
            pend = PendingTurtleRead(site, class_id, name)
            if pend not in self.pending:
                self.pending.add(pend)
        return set()

    def _interp_make_class(self, frame: FrameKey, ins: MakeClass) -> None:
        class_obj = ClassObject(ins.class_id)
        self._add_values(frame, ins.result, {class_obj})
        bases = self.class_bases[ins.class_id]
        for op in ins.bases:
            for value in self._values(frame, op):
                if value not in bases:
                    bases.add(value)
                    self.changed = True
        module = self.program.module_of_proc(frame[0])
        body_proc = module.classes[ins.class_id].body_proc
        body_frame = (body_proc, DEFAULT_CONTEXT)
        self._ensure_frame(body_frame, frame)
        self._add_values(body_frame, CLASS_SELF_REG, {class_obj})
        self.cg.add_edge(frame, f"class:{ins.class_id}", body_frame)

    def _interp_import(self, frame: FrameKey, ins: Import) -> None:
        dotted = ins.dotted
        value = import_value(dotted, self.program)
        if isinstance(value, ModuleInstance):
            self._import_module(frame, ins, value.module_id)
            self._add_values(frame, ins.result, {self._module_value(value.module_id)})
            return
        parent, _, member = dotted.rpartition(".")
        if parent and parent in self.program.modules:
            self._import_module(frame, ins, parent)
            mod_value = self._module_value(parent)
            self._add_values(frame, ins.result, self.fields.get((mod_value, member), set()))
            return
        path = value.path
        origin = (ins.span.file, ins.span.start_line)
        if path not in self.import_origins or origin < self.import_origins[path]:
            self.import_origins[path] = origin
        self._add_values(frame, ins.result, {value})

    def _import_module(self, frame: FrameKey, ins: Import, module_id: str) -> None:
        module = self.program.modules[module_id]
        body_frame = (module.script_proc, DEFAULT_CONTEXT)
        self._ensure_frame(body_frame, None)
        self.cg.add_edge(frame, f"import:{module_id}@{ins.span.start_line}", body_frame)

    # -- dispatch ----------------------------------------------------------------

    def _user_ctx(self, site: str) -> ContextKey:
        if self.opts.user_context == "site":
            return site_context(site)
        return DEFAULT_CONTEXT

    def _dispatch(self, frame: FrameKey, ins: CallOrNew, value: Value) -> None:
        site = ins.site_id
        if isinstance(value, BuiltinFunction):
            if ins.args:
                self._add_values(frame, ins.result, self._values(frame, ins.args[0]))
            self._record_outcome(frame, site, Outcome("identity", builtin=value.name))
        elif isinstance(value, ContainerMethod):
            if value.name in CONTAINER_MUTATORS:
                stored: set[Value] = set()
                for op in ins.args:
                    stored |= self._values(frame, op)
                for _, op in ins.kwargs:
                    stored |= self._values(frame, op)
                if stored:
                    self._add_field(value.container, ELEMENTS_FIELD, stored)
            else:
                self._add_values(
                    frame, ins.result, self.fields.get((value.container, ELEMENTS_FIELD), set())
                )
            self._record_outcome(
                frame, site, Outcome("container", receiver=value.container, builtin=value.name)
            )
        elif isinstance(value, FunctionInstance):
            callee = self._invoke(frame, ins, value, prepend=())
            self._record_outcome(frame, site, Outcome("user", proc=value.proc_id, ctx=callee[1]))
        elif isinstance(value, BoundMethod):
            callee = self._invoke(frame, ins, value.func, prepend=(value.receiver,))
            self._record_outcome(
                frame, site,
                Outcome("bound", proc=value.func.proc_id, ctx=callee[1], receiver=value.receiver),
            )
        elif isinstance(value, ClassObject):
            self._dispatch_creation(frame, ins, value)
        elif isinstance(value, (ModuleInstance, ScriptInstance)):
            called = False
            for member in self.fields.get((value, "__call__"), set()):
                if isinstance(member, FunctionInstance):
                    callee = self._invoke(frame, ins, member, prepend=())
                    self._record_outcome(
                        frame, site,
                        Outcome("module_call", proc=member.proc_id, ctx=callee[1], receiver=value),
                    )
                    called = True
            if not called:
                pass  # no callable interpretation; counted at fixpoint
        elif isinstance(value, InstanceOf):
            for member in self._instance_member(value, "__call__", site):
                if isinstance(member, BoundMethod):
                    callee = self._invoke(frame, ins, member.func, prepend=(member.receiver,))
                    self._record_outcome(
                        frame, site,
                        Outcome("bound", proc=member.func.proc_id, ctx=callee[1], receiver=value),
                    )
                elif isinstance(member, FunctionInstance):
                    callee = self._invoke(frame, ins, member, prepend=())
                    self._record_outcome(
                        frame, site,
                        Outcome("user", proc=member.proc_id, ctx=callee[1], receiver=value),
                    )
                elif isinstance(member, Turtle):
                    self._dispatch_turtle(frame, ins, member)
        elif isinstance(value, Turtle):
            self._dispatch_turtle(frame, ins, value)

    def _dispatch_creation(self, frame: FrameKey, ins: CallOrNew, value: ClassObject) -> None:
        site = ins.site_id
        new_fns = [
            m for m in self._class_member(value.class_id, "__new__")
            if isinstance(m, FunctionInstance)
        ]
        if new_fns:
            # A user-defined __new__ replaces allocation; the call's value is
            # whatever __new__ returns.
            for fn in new_fns:
                callee = self._invoke(frame, ins, fn, prepend=(value,))
                self._record_outcome(
                    frame, site,
                    Outcome("new", proc=fn.proc_id, ctx=callee[1], class_id=value.class_id),
                )
            return
        instance = InstanceOf(value.class_id, site)
        self._add_values(frame, ins.result, {instance})
        init_fns = [
            m for m in self._class_member(value.class_id, "__init__")
            if isinstance(m, FunctionInstance)
        ]
        for fn in init_fns:
            callee = self._invoke(frame, ins, fn, prepend=(instance,), bind_result=False)
            self._record_outcome(
                frame, site,
                Outcome("init", proc=fn.proc_id, ctx=callee[1],
                        class_id=value.class_id, instance=instance),
            )
        if not init_fns:
            self._record_outcome(
                frame, site, Outcome("alloc", class_id=value.class_id, instance=instance)
            )

    def _dispatch_turtle(self, frame: FrameKey, ins: CallOrNew, receiver: Turtle) -> None:
        site = ins.site_id
        arg_values: list[Value] = []
        for op in ins.args:
            arg_values.extend(self._values(frame, op))
        for _, op in ins.kwargs:
            arg_values.extend(self._values(frame, op))
        call = turtle_call(receiver, ins.site_name, tuple(arg_values), self.opts.turtle_depth)
        self._add_values(frame, ins.result, {call.result})
        turtle_node = (TURTLE_PROC, site_context(site))
        self.cg.add_edge(frame, site, turtle_node)
        self._record_outcome(
            frame, site,
            Outcome("turtle", receiver_path=receiver.path, result_path=call.result.path),
        )
        for idx, cb in enumerate(sorted(call.callbacks, key=value_sort_key)):
            fn = cb.func if isinstance(cb, BoundMethod) else cb
            ctx = self._user_ctx(site)
            callee = (fn.proc_id, ctx)
            self._ensure_frame(callee, fn.env)
            proc = self.program.proc(fn.proc_id)
            params = list(proc.params)
            if isinstance(cb, BoundMethod) and params:
                self._add_values(callee, params[0], {cb.receiver})
                params = params[1:]
            for param in params:
                self._add_values(callee, param, {call.result})
            if proc.vararg:
                self._add_values(callee, proc.vararg, {call.result})
            self._bind_defaults(fn, callee)
            self.cg.add_edge(turtle_node, f"{site}#cb{idx}", callee)
            self._record_outcome(
                frame, site,
                Outcome("callback", proc=fn.proc_id, ctx=ctx, callback=cb,
                        result_path=call.result.path),
            )

    def _invoke(
        self,
        frame: FrameKey,
        ins: CallOrNew,
        fn: FunctionInstance,
        prepend: tuple[Value, ...],
        bind_result: bool = True,
    ) -> FrameKey:
        ctx = self._user_ctx(ins.site_id)
        callee = (fn.proc_id, ctx)
        self._ensure_frame(callee, fn.env)
        proc = self.program.proc(fn.proc_id)
        params = list(proc.params)
        pos_values: list[set[Value]] = [set([v]) for v in prepend]
        pos_values.extend(self._values(frame, op) for op in ins.args)
        for i, values in enumerate(pos_values):
            if i < len(params):
                self._add_values(callee, params[i], values)
            elif proc.vararg:
                self._add_values(callee, proc.vararg, values)
        for kw_name, op in ins.kwargs:
            values = self._values(frame, op)
            if kw_name is not None and kw_name in params:
                self._add_values(callee, kw_name, values)
            elif proc.kwarg:
                self._add_values(callee, proc.kwarg, values)
        self._bind_defaults(fn, callee)
        self.cg.add_edge(frame, ins.site_id, callee)
        if bind_result:
            self._add_values(frame, ins.result, self.registers.get((callee, RETURN_REG), set()))
        return callee

    def _bind_defaults(self, fn: FunctionInstance, callee: FrameKey) -> None:
        defaults = self.proc_defaults.get((fn.proc_id, fn.env)) if fn.env else None
        if not defaults:
            return
        for param, op in defaults:
            self._add_values(callee, param, self._values(fn.env, op))

    # -- top level -----------------------------------------------------------------

    def solve(self) -> AnalysisResult:
        self._started = time.monotonic()
        self._deadline = self._started + self.opts.budget_secs
        entry_module = self.program.modules[self.entry]
        restarts = 0
        while True:
            self._reset()
            script_frame = (entry_module.script_proc, DEFAULT_CONTEXT)
            self._ensure_frame(script_frame, None)
            self.cg.add_edge(self.cg.root, f"{ROOT_PROC}#s1", script_frame)
            self._run_pass()
            new_conversions = self._resolve_pending()
            if not new_conversions:
                break
            restarts += 1
            if restarts > self.opts.restart_cap:
                raise AnalysisBudgetError(
                    entry_module.path,
                    f"turtle-inheritance restart cap ({self.opts.restart_cap}) exceeded",
                )
        return self._freeze(restarts)

    def _resolve_pending(self) -> bool:
        added = False
        for pend in sorted(self.pending, key=lambda p: (p.class_id, p.field_name, p.site)):
            key = (pend.class_id, pend.field_name)
            if key in self.converted:
                continue
            if self._field_assigned_anywhere(pend.class_id, pend.field_name):
                continue
            turtles = {
                Turtle(extend_turtle_path(tb.path, pend.field_name, self.opts.turtle_depth))
                for tb in self._turtle_bases(pend.class_id)
            }
            if turtles:
                self.converted[key] = turtles
                added = True
        return added

    def _freeze(self, restarts: int) -> AnalysisResult:
        # Drop fallback "alloc" outcomes that a later round upgraded to
        # "init" (outcome sets only grow during propagation).
        for key, outs in self.outcomes.items():
            inited = {o.class_id for o in outs if o.kind == "init"}
            if inited:
                stale = {o for o in outs if o.kind == "alloc" and o.class_id in inited}
                outs -= stale
        unresolved = 0
        resolved: set[str] = set()
        for frame in self.frames:
            proc = self.program.proc(frame[0])
            for ins in proc.instructions():
                if isinstance(ins, CallOrNew):
                    outs = self.outcomes.get((frame, ins.site_id), ())
                    if outs:
                        resolved.add(ins.site_id)
                    else:
                        unresolved += 1
        frames_sorted = tuple(sorted(self.frames, key=lambda f: (f[0], f[1].sort_key())))
        return AnalysisResult(
            program=self.program,
            entry=self.entry,
            options=self.opts,
            call_graph=self.cg,
            points_to=PointsTo(dict(self.registers), dict(self.fields)),
            frame_parents={k: set(v) for k, v in self.frame_parents.items()},
            reachable_frames=frames_sorted,
            site_outcomes={k: frozenset(v) for k, v in self.outcomes.items()},
            proc_defaults=dict(self.proc_defaults),
            converted_reads={k: frozenset(v) for k, v in self.converted.items()},
            class_bases={k: frozenset(v) for k, v in self.class_bases.items()},
            import_origins=dict(self.import_origins),
            resolved_sites=frozenset(resolved),
            restarts_used=restarts,
            unresolved_dispatches=unresolved,
            elapsed_secs=time.monotonic() - self._started,
        )


def build(program: IrProgram, entry: str, options: AnalysisOptions | None = None) -> AnalysisResult:
    """Run propagation to fixpoint, including turtle-inheritance restarts."""
    if entry not in program.modules:
        raise KeyError(f"entry module {entry!r} not in program")
    return _Solver(program, entry, options or AnalysisOptions()).solve()


def resolve_turtle_inheritance(result: AnalysisResult) -> AnalysisResult:
    """Re-run the analysis until no pending turtle-inherited reads remain.

    ``build`` already runs this loop to quiescence, so applying it to a
    finished result is the identity (modulo timings); it exists as the
    documented entry point for driving the restart phase explicitly.
    """
    return build(result.program, result.entry, result.options)


def dump_callgraph(result: AnalysisResult) -> str:
    """Stable textual edge list for --dump-callgraph."""
    lines = []
    for (caller, site), callees in sorted(
        result.call_graph.edges.items(),
        key=lambda item: (item[0][0][0], item[0][0][1].sort_key(), item[0][1]),
    ):
        for callee in sorted(callees, key=lambda f: (f[0], f[1].sort_key())):
            lines.append(
                f"{caller[0]} [{caller[1]}] --{site}--> {callee[0]} [{callee[1]}]"
            )
    return "\n".join(lines) + "\n"
