import networkx as nx
import pytest

from abstraction import ClassVar, StateLattice
from bytecode import load_program
from computation import (
    AnalysisLimitError,
    GraphLimits,
    NodeOrigin,
    WitnessNotFoundError,
    build_graph,
    dump_graph,
    export_dot,
    initial_abstract_state,
    max_step_length,
    trace_concrete,
)
from machine import UNIT, ConcreteMachine, ObjectRecord
from shape import AssumptionError, parse_assumptions
from symbolic import EdgeKind

APPEND_ASSUMPTIONS = ["acyclic:this", "unshared:this,ys"]
LOOP_HEAD = (("List", "append", 4),)
CORPUS_ENTRIES = [
    ("append.jbc", "List", "append"),
    ("inits.jbc", "Main", "inits"),
    ("flatten.jbc", "Flatten", "flatten"),
    ("dispatch.jbc", "B", "m"),
    ("dispatch.jbc", "C", "call"),
    ("dispatch.jbc", "C", "main"),
]


def list_literal(values):
    text = "null"
    for value in reversed(values):
        text = f"List{{val:{value},next:{text}}}"
    return text


def append_graph(program):
    initial = initial_abstract_state(
        program, "List", "append", parse_assumptions(APPEND_ASSUMPTIONS), this_nonnull=True
    )
    return build_graph(program, initial)


def append_run(program, length):
    machine = ConcreteMachine(program)
    state = machine.initial_state("List", "append", [list_literal(list(range(length))), "List{val:9,next:null}"])
    return machine.run(state, fuel=10_000)


def test_initial_state_tags_entry_regions(append_program):
    state = initial_abstract_state(append_program, "List", "append", parse_assumptions(APPEND_ASSUMPTIONS))
    this, ys, local = state.current.registers
    assert state.content(this.ref) == ClassVar("List")
    assert state.tags(this.ref) == frozenset({"this"})
    assert state.tags(ys.ref) == frozenset({"ys"})
    assert local == UNIT
    assert state.annotated(this.ref, ys.ref)


def test_nonnull_receiver_is_materialized(append_program):
    state = initial_abstract_state(append_program, "List", "append", this_nonnull=True)
    record = state.content(state.current.registers[0].ref)
    assert isinstance(record, ObjectRecord)
    assert record.class_name == "List"


def test_assumptions_must_name_entry_roots(append_program):
    with pytest.raises(AssumptionError):
        initial_abstract_state(append_program, "List", "append", parse_assumptions(["acyclic:xs"]))


def test_append_graph_widens_the_loop_head(append_program):
    graph = append_graph(append_program)

    widened = [node for node in graph.nodes() if graph.origin(node) is NodeOrigin.WIDENING]
    assert widened
    assert all(graph.state(node).locations == LOOP_HEAD for node in widened)

    instance_edges = graph.edges_of_kind(EdgeKind.INSTANCE)
    targets = {target for _, target, _ in instance_edges}
    assert targets & set(widened)
    # the first arrival and a later arrival both end up below the widened state
    sources = [source for source, target, _ in instance_edges if target in widened]
    assert len(sources) >= 2
    assert all(graph.state(source).locations == LOOP_HEAD for source in sources)


def test_append_graph_ends_in_returns(append_program):
    graph = append_graph(append_program)
    outcomes = [graph.outcome(node) for node in graph.leaves()]
    assert outcomes
    assert any(outcome.failure is None and outcome.value == UNIT for outcome in outcomes)
    for node in graph.nodes():
        assert graph.is_expanded(node)


def test_append_graph_has_no_dangling_instance_edges(append_program):
    graph = append_graph(append_program)
    for source, target, label in graph.edges():
        assert source in graph and target in graph
        if label.kind is EdgeKind.INSTANCE:
            assert graph.state(source).locations == graph.state(target).locations
        if label.kind is EdgeKind.REFINE:
            assert graph.origin(target) is NodeOrigin.REFINEMENT


@pytest.mark.parametrize("length", [1, 2, 3, 4])
def test_every_concrete_step_has_a_witness_path(append_program, length):
    graph = append_graph(append_program)
    result = append_run(append_program, length)
    assert result.halted

    report = trace_concrete(graph, append_program, result.trace)
    assert len(report.paths) == result.steps
    assert all(step_length >= 1 for step_length in report.lengths)
    assert report.max_length <= report.bound
    assert report.bound == max_step_length(graph)


def test_witness_bound_does_not_depend_on_the_input(append_program):
    graph = append_graph(append_program)
    bounds = {trace_concrete(graph, append_program, append_run(append_program, n).trace).bound for n in (1, 4)}
    assert len(bounds) == 1


def test_foreign_runs_have_no_witness(append_program, corpus_dir):
    dispatch = load_program(corpus_dir / "dispatch.jbc")
    machine = ConcreteMachine(dispatch)
    run = machine.run(machine.initial_state("A", "m", ["A{}"]), fuel=10).trace
    with pytest.raises(WitnessNotFoundError):
        trace_concrete(append_graph(append_program), append_program, run)


def test_empty_run_has_an_empty_report(append_program):
    report = trace_concrete(append_graph(append_program), append_program, [])
    assert report.paths == []
    assert report.max_length == 0


@pytest.mark.parametrize(("name", "entry", "method"), CORPUS_ENTRIES)
def test_corpus_graphs_are_finite(corpus_dir, name, entry, method):
    program = load_program(corpus_dir / name)
    graph = build_graph(program, initial_abstract_state(program, entry, method))
    assert 0 < len(graph) <= GraphLimits().max_nodes
    assert graph.entry == 0
    for node in graph.nodes():
        assert graph.is_expanded(node)


@pytest.mark.parametrize(("name", "entry", "method"), CORPUS_ENTRIES)
def test_widened_nodes_hang_off_the_states_they_generalize(corpus_dir, name, entry, method):
    program = load_program(corpus_dir / name)
    graph = build_graph(program, initial_abstract_state(program, entry, method))
    assert {graph.entry} | nx.descendants(graph.graph, graph.entry) == set(graph.nodes())
    for node in graph.nodes():
        if graph.origin(node) is not NodeOrigin.WIDENING:
            continue
        parent = graph.parent(node)
        assert graph.origin(parent) is not NodeOrigin.WIDENING
        assert [target for target, _ in graph.out_edges(parent)] == [node]


def test_repeated_widening_keeps_one_generalization_per_head(append_program):
    graph = append_graph(append_program)
    widened = [node for node in graph.nodes() if graph.origin(node) is NodeOrigin.WIDENING]
    parents = [graph.parent(node) for node in widened]
    assert len(parents) == len(set(parents))
    assert {graph.entry} | nx.descendants(graph.graph, graph.entry) == set(graph.nodes())


def test_looping_method_closes_a_cycle(corpus_dir):
    program = load_program(corpus_dir / "dispatch.jbc")
    graph = build_graph(program, initial_abstract_state(program, "B", "m", this_nonnull=True))
    assert graph.edges_of_kind(EdgeKind.INSTANCE)
    assert not [node for node in graph.leaves() if graph.outcome(node).failure is None]


def test_node_limit_is_enforced(append_program):
    initial = initial_abstract_state(append_program, "List", "append")
    with pytest.raises(AnalysisLimitError, match="nodes"):
        build_graph(append_program, initial, GraphLimits(max_nodes=3))


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        GraphLimits(max_depth=0)


def test_exports_are_deterministic(append_program):
    first, second = append_graph(append_program), append_graph(append_program)
    assert dump_graph(first, append_program) == dump_graph(second, append_program)
    assert export_dot(first, append_program) == export_dot(second, append_program)

    dot = export_dot(first, append_program)
    assert dot.startswith("// Computation graph")
    assert "digraph computation {" in dot
    assert "style=dashed" in dot

    dump = dump_graph(first, append_program)
    assert dump.splitlines()[0].startswith("n0 [entry] List.append 00")
    assert " instance" in dump


def test_loop_head_states_join_to_an_upper_bound(append_program):
    graph = append_graph(append_program)
    lattice = StateLattice(append_program)
    states = [graph.state(node) for node in graph.at_location(LOOP_HEAD)]
    assert any(isinstance(content, ClassVar) for state in states for content in state.heap.values())
    for left in states:
        for right in states:
            joined = lattice.join(left, right)
            assert lattice.leq(left, joined)
            assert lattice.leq(right, joined)
