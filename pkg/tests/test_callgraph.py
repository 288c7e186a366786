import random

import pytest
from hypothesis import given, settings, strategies as st

from turtleflow import callgraph as cg
from turtleflow.frontend import CallOrNew, IrProgram, lower_program, parse_module

from util import analyze_fixture, analyze_source, random_chain_source


def last_script_call(result) -> CallOrNew:
    module = result.program.modules[result.entry]
    script = module.procedures[module.script_proc]
    calls = [i for i in script.instructions() if isinstance(i, CallOrNew)]
    return calls[-1]


# -- standalone turtle operations ----------------------------------------------


def test_turtle_call_extends_path():
    out = cg.turtle_call(cg.Turtle(("numpy",)), "hstack", ())
    assert out.result.path == ("numpy", "hstack")
    assert out.callbacks == ()


def test_turtle_call_linear_svc_fit():
    out = cg.turtle_call(cg.Turtle(("sklearn", "svm", "LinearSVC")), "fit", ())
    assert ".".join(out.result.path) == "sklearn.svm.LinearSVC.fit"


def test_turtle_call_surfaces_function_callbacks():
    fn = cg.FunctionInstance("m::f", ("m::<script>", cg.DEFAULT_CONTEXT))
    out = cg.turtle_call(cg.Turtle(("m",)), "map", (fn,))
    assert out.result.path == ("m", "map")
    assert out.callbacks == (fn,)


def test_turtle_path_truncation_absorbs():
    path = ("a",)
    for i in range(20):
        path = cg.extend_turtle_path(path, f"s{i}", max_depth=8)
    assert len(path) <= 8
    assert path[-1] == cg.TRUNCATION_MARK
    assert cg.extend_turtle_path(path, "more", max_depth=8) == path


def test_turtle_field_read_returns_container():
    t = cg.Turtle(("np",))
    assert cg.turtle_field_read(t, "ones") is t
    assert cg.turtle_field_read(t, "zeros") is t


def test_import_value_unanalyzed_is_turtle_with_member_label():
    program = IrProgram(modules={})
    value = cg.import_value("sklearn.svm.LinearSVC", program)
    assert isinstance(value, cg.Turtle)
    assert value.display == "LinearSVC"


def test_import_value_analyzed_module():
    tree = parse_module("x = 1\n", "sibling.py")
    program = lower_program([tree])
    value = cg.import_value("sibling", program)
    assert value == cg.ModuleInstance("sibling")


# -- dispatch over the dynamic-dispatch fixture ---------------------------------


@pytest.fixture(scope="module")
def dispatch_result():
    result, _, _ = analyze_fixture(
        "dynamic_dispatch", "main.py", siblings=[("dynamic_dispatch", "X.py")]
    )
    return result


def test_all_seven_behaviors_resolve_at_one_site(dispatch_result):
    outs = dispatch_result.outcomes_for_site(last_script_call(dispatch_result).site_id)
    kinds = {o.kind for o in outs}
    assert {"init", "new", "user", "bound", "module_call"} <= kinds
    procs = {o.proc for o in outs if o.proc}
    assert any(p.endswith(".__init__") for p in procs)
    assert any(p.endswith(".__new__") for p in procs)
    assert any("<lambda" in p for p in procs)
    assert "X::__call__" in procs
    assert any(p.endswith(".s") for p in procs)
    assert any(p.endswith(".i") for p in procs)
    # the plain function definition of X
    assert any(
        dispatch_result.program.proc(p).kind == "function" and p.endswith("X'3")
        for p in procs
    )


def test_all_seven_bodies_reachable(dispatch_result):
    reachable = dispatch_result.call_graph.reachable_procs()
    for suffix in (".__init__", ".__new__", ".s", ".i"):
        assert any(p.endswith(suffix) for p in reachable), suffix
    assert "X::__call__" in reachable
    assert any("<lambda" in p for p in reachable)


def test_unified_site_mixes_creation_and_call_edges(dispatch_result):
    outs = dispatch_result.outcomes_for_site(last_script_call(dispatch_result).site_id)
    assert any(o.kind in ("init", "new", "alloc") for o in outs)
    assert any(o.kind == "user" for o in outs)


def test_trivial_script_call_graph_is_root_and_script():
    result, _, _ = analyze_source("x = 1\n")
    procs = result.call_graph.reachable_procs()
    assert procs == {cg.ROOT_PROC, "snippet::<script>"}


# -- fig.-1 style behavior --------------------------------------------------------


def test_both_fit_functions_receive_both_models():
    result, _, _ = analyze_fixture("running_example", "running_example.py")
    mod = cg.ScriptInstance("running_example")
    fitit = result.points_to.field(mod, "fitit")
    assert {type(v) for v in fitit} == {cg.FunctionInstance}
    assert len(fitit) == 2
    for proc in ("running_example::fd", "running_example::<lambda@10:13>"):
        frames = result.frames_of_proc(proc)
        assert frames, proc
        models = result.points_to.reg(frames[0], "model")
        paths = {".".join(v.path) for v in models if isinstance(v, cg.Turtle)}
        assert any("LinearSVC" in p for p in paths)
        assert any("FrankWolfeSSVM" in p for p in paths)


def test_sibling_import_reaches_module_body():
    extra = {"helper": "def setup():\n    return 3\nsetup()\n"}
    result, _, _ = analyze_source("import helper\n", extra=extra)
    assert "helper::<script>" in result.call_graph.reachable_procs()
    assert "helper::setup" in result.call_graph.reachable_procs()


# -- turtle inheritance restarts ---------------------------------------------------


def test_never_assigned_member_becomes_turtle_read():
    source = (
        "import sk\n"
        "class Model(sk.Base):\n"
        "    def go(self):\n"
        "        return self.helper\n"
        "m = Model()\n"
        "out = m.go()\n"
    )
    result, _, _ = analyze_source(source)
    assert result.restarts_used == 1
    converted = result.converted_reads[("snippet::Model#class", "helper")]
    assert {".".join(t.path) for t in converted} == {"sk.helper"}


def test_assigned_member_is_not_converted():
    source = (
        "import sk\n"
        "class Model(sk.Base):\n"
        "    def __init__(self):\n"
        "        self.helper = sk.tool()\n"
        "    def go(self):\n"
        "        return self.helper\n"
        "m = Model()\n"
        "out = m.go()\n"
    )
    result, _, _ = analyze_source(source)
    assert ("snippet::Model#class", "helper") not in result.converted_reads


def test_two_stage_restart_fixture():
    result, _, _ = analyze_fixture("restart_two_stage", "two_stage.py")
    assert result.restarts_used == 2
    run = result.frames_of_proc("two_stage::Task.run")[0]
    assert {str(v) for v in result.points_to.reg(run, cg.RETURN_REG)} == {"T(fw.helper)"}
    start = result.frames_of_proc("two_stage::Launcher.start")[0]
    assert {str(v) for v in result.points_to.reg(start, "runner")} == {"T(fw.runner)"}


def test_restart_cap_is_enforced():
    options = cg.AnalysisOptions(restart_cap=1)
    with pytest.raises(cg.AnalysisBudgetError):
        analyze_fixture("restart_two_stage", "two_stage.py", options=options)


def test_resolve_turtle_inheritance_is_quiescent():
    result, _, _ = analyze_fixture("restart_two_stage", "two_stage.py")
    again = cg.resolve_turtle_inheritance(result)
    assert again.converted_reads == result.converted_reads
    assert set(again.reachable_frames) == set(result.reachable_frames)


def test_budget_error_names_the_file():
    options = cg.AnalysisOptions(budget_secs=0.0)
    with pytest.raises(cg.AnalysisBudgetError) as err:
        analyze_fixture("running_example", "running_example.py", options=options)
    assert "running_example.py" in err.value.file


# -- callbacks ----------------------------------------------------------------------


def test_callback_passed_to_turtle_is_reachable():
    source = "import m\ndef f(x):\n    return x\nm.each(f)\n"
    result, _, _ = analyze_source(source)
    assert "snippet::f" in result.call_graph.reachable_procs()


def test_bound_method_callback_is_reachable():
    source = (
        "import bus\n"
        "class H:\n"
        "    def on_event(self, e):\n"
        "        return e\n"
        "h = H()\n"
        "bus.listen(h.on_event)\n"
    )
    result, _, _ = analyze_source(source)
    assert "snippet::H.on_event" in result.call_graph.reachable_procs()


# -- randomized properties ------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_turtle_algebra_random_chains(seed):
    rng = random.Random(seed)
    source, expected, read_vars, callback = random_chain_source(rng)
    result, _, _ = analyze_source(source)
    mod = cg.ScriptInstance("snippet")
    values = result.points_to.field(mod, "value")
    turtles = [v for v in values if isinstance(v, cg.Turtle)]
    assert [t.path for t in turtles] == [expected]
    for var in read_vars:
        assert result.points_to.field(mod, var) == values
    assert f"snippet::{callback}" in result.call_graph.reachable_procs()


def test_user_site_context_flag_multiplies_frames():
    source = "def f(x):\n    return x\na = f(1)\nb = f(2)\n"
    mono, _, _ = analyze_source(source)
    sited, _, _ = analyze_source(source, options=cg.AnalysisOptions(user_context="site"))
    assert len(mono.frames_of_proc("snippet::f")) == 1
    assert len(sited.frames_of_proc("snippet::f")) == 2


def test_dump_callgraph_is_stable():
    r1, _, _ = analyze_fixture("running_example", "running_example.py")
    r2, _, _ = analyze_fixture("running_example", "running_example.py")
    assert cg.dump_callgraph(r1) == cg.dump_callgraph(r2)
