import textwrap
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bytecode import load_program, parse_program
from machine import (
    NULL,
    UNIT,
    Address,
    ArgumentError,
    BoolValue,
    ConcreteMachine,
    Failure,
    FailureReason,
    Frame,
    Halted,
    IntValue,
    JvmState,
    Next,
    ObjectRecord,
    state_graph,
    state_size,
)

APPEND = load_program(Path(__file__).resolve().parents[1] / "corpus" / "append.jbc")


def list_literal(values):
    text = "null"
    for value in reversed(values):
        text = f"List{{val:{value},next:{text}}}"
    return text


def straight_line(body: str, max_stack: int = 3, max_vars: int = 1) -> ConcreteMachine:
    text = textwrap.dedent(
        f"""\
        Class:
         Name: P
         Classbody:
          Superclass: Object
          Fields:
           P next
          Methods:
           Method: int f
            Methodbody:
             MaxStack: {max_stack}
             MaxVars: {max_vars}
             Bytecode:
        """
    ) + textwrap.indent(textwrap.dedent(body), "      ")
    return ConcreteMachine(parse_program(text))


def run_append(program, values, ys="null"):
    machine = ConcreteMachine(program)
    state = machine.initial_state("List", "append", [list_literal(values), ys])
    return machine.run(state, fuel=10_000)


def test_initial_state_of_append(append_program):
    machine = ConcreteMachine(append_program)
    state = machine.initial_state("List", "append", ["List{val:1,next:null}", "null"])

    assert len(state.frames) == 1
    frame = state.current
    assert frame.stack == ()
    assert frame.registers == (Address(1), NULL, UNIT)
    assert frame.location == ("List", "append", 0)
    assert state.heap[1] == ObjectRecord("List", ((("List", "next"), NULL), (("List", "val"), IntValue(1))))


def test_initial_state_rejects_wrong_arity(append_program):
    machine = ConcreteMachine(append_program)
    with pytest.raises(ArgumentError):
        machine.initial_state("List", "append", ["List{val:1,next:null}"])


def test_initial_state_rejects_ill_typed_arguments(append_program):
    machine = ConcreteMachine(append_program)
    with pytest.raises(ArgumentError):
        machine.initial_state("List", "append", ["List{val:true,next:null}", "null"])
    with pytest.raises(ArgumentError):
        machine.initial_state("List", "append", ["List{val:1,next:null}", "7"])


def test_back_references_share_objects_across_arguments(append_program):
    machine = ConcreteMachine(append_program)
    state = machine.initial_state("List", "append", ["#1 List{val:0,next:null}", "@1"])
    assert state.current.registers[0] == state.current.registers[1] == Address(1)


def test_cyclic_literal_builds_a_self_loop(append_program):
    machine = ConcreteMachine(append_program)
    state = machine.initial_state("List", "append", ["#1 List{val:0,next:@1}", "null"])
    assert state.heap[1].field(("List", "next")) == Address(1)
    graph = state_graph(state)
    assert graph.on_cycle(("addr", 1))


def test_append_one_cell_takes_fifteen_steps(append_program):
    result = run_append(append_program, [1])
    assert isinstance(result.outcome, Halted)
    assert result.outcome.value == UNIT
    assert result.steps == 15
    assert result.steps == len(result.trace) - 1


def test_every_extra_cell_costs_one_loop_iteration(append_program):
    steps = [run_append(append_program, list(range(n))).steps for n in range(1, 6)]
    assert [later - earlier for earlier, later in zip(steps, steps[1:])] == [11, 11, 11, 11]


def test_append_links_ys_behind_the_last_cell(append_program):
    result = run_append(append_program, [1, 2], ys="List{val:3,next:null}")
    heap = result.final_state.heap
    second = heap[1].field(("List", "next"))
    assert heap[second.ref].field(("List", "next")) == Address(3)


def test_iadd_adds_the_two_topmost_entries():
    machine = straight_line("00: Push 2\n01: Push 3\n02: IAdd\n03: Return\n")
    state = machine.initial_state("P", "f", ["P{}"])
    for _ in range(2):
        state = machine.step(state).state
    result = machine.step(state)
    assert isinstance(result, Next)
    assert result.state.current.stack == (IntValue(5),)
    assert result.state.current.pc == 3


def test_if_false_jumps_by_its_offset():
    machine = straight_line("00: Push false\n01: IfFalse 2\n02: Push 0\n03: Push 1\n04: Return\n")
    state = machine.step(machine.initial_state("P", "f", ["P{}"])).state
    assert machine.step(state).state.current.pc == 3


def test_getfield_on_null_fails():
    machine = straight_line("00: Push null\n01: Getfield next P\n02: Return\n")
    state = machine.step(machine.initial_state("P", "f", ["P{}"])).state
    assert machine.step(state) == Failure(FailureReason.NULL_DEREF)


def test_failed_checkcast_stops_the_run():
    text = textwrap.dedent(
        """\
        Class:
         Name: A
         Classbody:
          Superclass: Object
        Class:
         Name: B
         Classbody:
          Superclass: Object
          Methods:
           Method: int f
            Methodbody:
             MaxStack: 1
             MaxVars: 0
             Bytecode:
              00: New A
              01: Checkcast B
              02: Return
        """
    )
    machine = ConcreteMachine(parse_program(text))
    result = machine.run(machine.initial_state("B", "f", ["B{}"]), fuel=10)
    assert result.outcome == Failure(FailureReason.CAST_ERROR)
    assert result.steps == 1


def test_reference_comparison_uses_identity():
    machine = straight_line("00: Load 0\n01: Load 0\n02: CmpEq\n03: Return\n")
    result = machine.run(machine.initial_state("P", "f", ["P{}"]), fuel=10)
    assert result.outcome == Halted(BoolValue(True))

    machine = straight_line("00: Load 0\n01: Push null\n02: CmpNeq\n03: Return\n")
    result = machine.run(machine.initial_state("P", "f", ["P{}"]), fuel=10)
    assert result.outcome == Halted(BoolValue(True))


def test_while_true_exhausts_its_fuel(corpus_dir):
    program = load_program(corpus_dir / "dispatch.jbc")
    machine = ConcreteMachine(program)
    result = machine.run(machine.initial_state("B", "m", ["B{}"]), fuel=100)
    assert result.outcome == Failure(FailureReason.FUEL_EXHAUSTED)
    assert result.steps == 100


def test_virtual_dispatch_follows_the_runtime_class(corpus_dir):
    program = load_program(corpus_dir / "dispatch.jbc")
    machine = ConcreteMachine(program)
    state = machine.initial_state("C", "call", ["C{}", "A{}"])
    assert machine.run(state, fuel=100).halted

    state = machine.initial_state("C", "call", ["C{}", "B{}"])
    result = machine.run(state, fuel=100, keep_trace=False)
    assert result.outcome == Failure(FailureReason.FUEL_EXHAUSTED)
    assert result.trace == []
    assert any(frame.class_name == "B" for frame in result.final_state.frames)


def test_run_requires_positive_fuel(append_program):
    machine = ConcreteMachine(append_program)
    state = machine.initial_state("List", "append", ["List{val:1,next:null}", "null"])
    with pytest.raises(ValueError):
        machine.run(state, fuel=0)


def test_state_size_of_a_null_register():
    state = JvmState({}, (Frame((), (NULL,), "P", "f", 0),))
    assert state_size(state) == 2


def test_state_size_weights_integers_by_magnitude(append_program):
    machine = ConcreteMachine(append_program)
    state = machine.initial_state("List", "append", ["List{val:5,next:null}", "null"])
    assert state_size(state) == 10


def test_state_size_counts_shared_data_once_per_root():
    record = ObjectRecord("List", ((("List", "next"), NULL), (("List", "val"), IntValue(1))))
    state = JvmState({1: record}, (Frame((), (Address(1), Address(1)), "List", "append", 0),))
    assert state_size(state) == 7


def test_state_graph_of_a_unit_register():
    state = JvmState({}, (Frame((), (UNIT,), "P", "f", 0),))
    graph = state_graph(state)
    assert len(graph) == 2
    (root,) = graph.roots
    assert [graph.label(node) for node in graph.successors(root)] == [UNIT]


def test_state_graph_orders_fields_by_the_field_table(append_program):
    machine = ConcreteMachine(append_program)
    state = machine.initial_state("List", "append", ["List{val:0,next:null}", "null"])
    graph = state_graph(state)
    fields = graph.fields(("addr", 1))
    assert [field for field, _ in fields] == [("List", "next"), ("List", "val")]
    assert graph.label(("addr", 1)) == "List"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-5, max_value=5), min_size=1, max_size=6))
def test_append_runtime_is_linear_in_the_list_length(values):
    result = run_append(APPEND, values)
    assert result.halted
    assert result.steps == 15 + 11 * (len(values) - 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-5, max_value=5), min_size=1, max_size=5))
def test_state_size_of_a_list_sums_its_values(values):
    machine = ConcreteMachine(APPEND)
    state = machine.initial_state("List", "append", [list_literal(values), "null"])
    # each cell counts once plus |val|, the final null once, ys and cur once each
    expected = 1 + len(values) + sum(abs(value) for value in values) + 1 + 1 + 1
    assert state_size(state) == expected
