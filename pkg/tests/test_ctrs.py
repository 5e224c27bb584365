import textwrap
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abstraction import AbstractState, IntVar, beta
from bytecode import load_program
from computation import build_graph, initial_abstract_state
from ctrs import (
    NULL_SYM,
    Apply,
    BoolLit,
    CtrsSyntaxError,
    IntLit,
    Sort,
    SymbolKind,
    Var,
    emit_ctrs,
    is_ground,
    load_ctrs,
    parse_ctrs,
    render_ctrs,
    render_term,
    substitute,
    term_size,
    translate_value,
    tst,
)
from machine import NULL, Address, Frame, IntValue, JvmState, ObjectRecord, state_size
from shape import parse_assumptions
from symbolic import Arith, Compare, EdgeKind

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
APPEND = load_program(CORPUS / "append.jbc")
NEXT, VAL = ("List", "next"), ("List", "val")


def append_system(program):
    initial = initial_abstract_state(
        program, "List", "append", parse_assumptions(["acyclic:this", "unshared:this,ys"]), this_nonnull=True
    )
    graph = build_graph(program, initial)
    return graph, emit_ctrs(program, graph)


def list_state(values, back, ys_values, cur_index):
    """``this`` is a list over ``values`` whose last cell links back to cell ``back``, if given."""

    heap = {}
    for ref, value in enumerate(values, start=1):
        if ref < len(values):
            following = Address(ref + 1)
        else:
            following = Address(back + 1) if back is not None else NULL
        heap[ref] = ObjectRecord("List", ((NEXT, following), (VAL, IntValue(value))))
    base = len(values)
    for offset, value in enumerate(ys_values, start=1):
        following = Address(base + offset + 1) if offset < len(ys_values) else NULL
        heap[base + offset] = ObjectRecord("List", ((NEXT, following), (VAL, IntValue(value))))
    ys = Address(base + 1) if ys_values else NULL
    cur = Address(min(cur_index, len(values) - 1) + 1)
    return JvmState(heap, (Frame((), (Address(1), ys, cur), "List", "append", 4),))


values = st.lists(st.integers(min_value=-4, max_value=4), min_size=1, max_size=5)


@st.composite
def acyclic_states(draw):
    return list_state(draw(values), None, draw(values | st.just([])), draw(st.integers(0, 4)))


@st.composite
def cyclic_states(draw):
    cells = draw(values)
    back = draw(st.integers(min_value=0, max_value=len(cells) - 1))
    return list_state(cells, back, draw(values | st.just([])), draw(st.integers(0, 4)))


def translated_size(state):
    return 1 + sum(term_size(term) for term in tst(APPEND, beta(state)))


def test_term_size_follows_the_state_measure():
    assert term_size(IntLit(-3)) == 3
    assert term_size(NULL_SYM) == 1
    assert term_size(Var("i1", Sort.INT)) == 1
    assert term_size(Apply("List", (NULL_SYM, IntLit(2)))) == 4


def test_substitute_and_groundness():
    term = Apply("List", (Var("l1"), Var("i2", Sort.INT)))
    assert not is_ground(term)
    ground = substitute(term, {Var("l1"): NULL_SYM, Var("i2", Sort.INT): IntLit(5)})
    assert ground == Apply("List", (NULL_SYM, IntLit(5)))
    assert is_ground(ground)
    assert render_term(ground) == "List(null,5)"


def test_values_translate_by_kind(append_program):
    record = ObjectRecord("List", ((NEXT, NULL), (VAL, IntVar(3))))
    state = AbstractState(heap={1: record}, frames=(Frame((), (Address(1), NULL, NULL), "List", "append", 0),))
    assert translate_value(append_program, state, IntValue(-2)) == IntLit(-2)
    assert translate_value(append_program, state, NULL) == NULL_SYM
    assert translate_value(append_program, state, IntVar(3)) == Var("i3", Sort.INT)
    assert translate_value(append_program, state, Address(1)) == Apply("List", (NULL_SYM, Var("i3", Sort.INT)))


def test_cyclic_objects_become_fresh_variables(append_program):
    record = ObjectRecord("List", ((NEXT, Address(1)), (VAL, IntValue(1))))
    state = AbstractState(heap={1: record}, frames=(Frame((), (Address(1), NULL, NULL), "List", "append", 0),))
    this, ys, local = tst(append_program, state)
    assert this == Var("l2")
    assert ys == local == NULL_SYM


def test_emitted_append_system_has_one_rule_per_edge(append_program):
    graph, system = append_system(append_program)
    assert len(system.rules) == sum(1 for _ in graph.edges())
    system.check()
    assert system.symbols["List"].kind is SymbolKind.CONSTRUCTOR
    assert system.symbols["List"].arity == 2
    assert len(system.defined_symbols()) == len(graph)


def test_rules_rewrite_at_the_root_only(append_program):
    _, system = append_system(append_program)
    defined = set(system.defined_symbols())
    for rule in system.rules:
        assert rule.lhs.symbol in defined
        assert rule.rhs.symbol in defined
        for side in (rule.lhs, rule.rhs):
            for arg in side.args:
                assert defined.isdisjoint(_symbols(arg))


def test_instance_and_refinement_rules_keep_their_arguments(append_program):
    graph, system = append_system(append_program)
    kinds = [label.kind for _, _, label in graph.edges()]
    for kind, rule in zip(kinds, system.rules):
        if kind is not EdgeKind.EVAL:
            assert rule.lhs.args == rule.rhs.args
            assert not rule.extra_variables()


def test_field_update_introduces_a_fresh_variable(append_program):
    _, system = append_system(append_program)
    updates = [rule for rule in system.rules if rule.label.lower().endswith("putfield next list")]
    assert updates
    assert any(rule.extra_variables() for rule in updates)


def test_inits_system_has_a_right_hand_side_only_variable(corpus_dir):
    program = load_program(corpus_dir / "inits.jbc")
    graph = build_graph(program, initial_abstract_state(program, "Main", "inits"))
    system = emit_ctrs(program, graph)
    assert any(
        rule.extra_variables() and "putfield" in rule.label.lower() for rule in system.rules
    )


def test_emission_is_deterministic(append_program):
    _, first = append_system(append_program)
    _, second = append_system(append_program)
    assert render_ctrs(first) == render_ctrs(second)


def test_rendered_system_parses_back(append_program, tmp_path):
    _, system = append_system(append_program)
    text = render_ctrs(system)
    assert text.startswith("(SORTS int bool univ)\n(SIG\n")

    path = tmp_path / "append.ctrs"
    path.write_text(text, encoding="utf-8")
    parsed = load_ctrs(path)
    assert parsed == system
    assert render_ctrs(parsed) == text


def test_parse_a_small_system():
    text = textwrap.dedent(
        """\
        (SORTS int bool univ)
        (SIG
          f 2 defined "loop"
          g 1 defined
          Box 1 constructor
          Unit 0 constructor
        )
        (RULES
          (VAR i1:int b2:bool l3:univ)
          f(i1,l3) -> g(Box(l3)) [((i1>=0)/\\b2)\\/(not(i1>=0)/\\not(b2))] "guard"
          (VAR i1:int)
          g(i1) -> f(i1,Unit()) [i1+-1!=3]
        )
        """
    )
    system = parse_ctrs(text)
    first, second = system.rules
    assert first.lhs == Apply("f", (Var("i1", Sort.INT), Var("l3")))
    assert first.rhs == Apply("g", (Apply("Box", (Var("l3"),)),))
    assert first.extra_variables() == {Var("b2", Sort.BOOL)}
    assert first.label == "guard"
    assert system.comments == {"f": "loop"}
    assert second.rhs.args[1] == Apply("Unit", ())
    assert second.constraint == Compare("!=", Arith("+", Var("i1", Sort.INT), IntLit(-1)), IntLit(3))
    assert render_ctrs(parse_ctrs(render_ctrs(system))) == render_ctrs(system)


def test_negative_integers_keep_their_sign():
    system = parse_ctrs(
        "(SORTS int)\n(SIG f 1 defined)\n(RULES (VAR i1:int) f(-3) -> f(i1) [i1-2>=-7])\n"
    )
    (rule,) = system.rules
    assert rule.lhs.args == (IntLit(-3),)
    assert rule.constraint == Compare(">=", Arith("-", Var("i1", Sort.INT), IntLit(2)), IntLit(-7))
    assert parse_ctrs(render_ctrs(system)).rules == system.rules


@pytest.mark.parametrize(
    "text",
    [
        "(SORTS int)\n(SIG f 1 defined)\n(RULES (VAR) f(x) -> f(x) [true])\n",
        "(SORTS int)\n(SIG f 1 defined)\n(RULES (VAR x:univ) f(x) -> f(x,x) [true])\n",
        "(SORTS int)\n(SIG f 1 defined)\n(RULES (VAR x:real) f(x) -> f(x) [true])\n",
        "(SORTS int)\n(SIG f 1 magic)\n(RULES)\n",
        "(SORTS text)\n(SIG)\n(RULES)\n",
        "(SORTS int)\n(SIG f 1 defined\n",
    ],
)
def test_malformed_systems_are_rejected(text):
    with pytest.raises(CtrsSyntaxError):
        parse_ctrs(text)


def test_boolean_literals_parse_as_terms():
    system = parse_ctrs("(SORTS bool)\n(SIG f 1 defined)\n(RULES (VAR) f(true) -> f(false) [true])\n")
    (rule,) = system.rules
    assert rule.lhs.args == (BoolLit(True),)
    assert rule.rhs.args == (BoolLit(False),)


@settings(max_examples=1000, deadline=None)
@given(acyclic_states())
def test_translation_preserves_the_size_of_acyclic_states(state):
    assert translated_size(state) == state_size(state)


@settings(max_examples=300, deadline=None)
@given(cyclic_states())
def test_translation_never_grows_cyclic_states(state):
    assert translated_size(state) <= state_size(state)


def _symbols(term):
    if isinstance(term, Apply):
        yield term.symbol
        for arg in term.args:
            yield from _symbols(arg)
