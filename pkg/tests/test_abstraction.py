from dataclasses import replace
from pathlib import Path

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from abstraction import (
    AbstractState,
    Assumptions,
    ClassVar,
    IntVar,
    StateLattice,
    abs_size,
    beta,
    can_alias,
    collect_garbage,
    equivalent,
    gamma_member,
    instance_of,
    join,
    reduce,
    render_state,
    unify,
)
from bytecode import load_program
from machine import NULL, UNIT, Address, Frame, IntValue, JvmState, ObjectRecord, state_size

APPEND = load_program(Path(__file__).resolve().parents[1] / "corpus" / "append.jbc")
NEXT, VAL = ("List", "next"), ("List", "val")


def cell(next_value, val):
    return ObjectRecord("List", ((NEXT, next_value), (VAL, val)))


def loop_head(heap, this, ys, cur, **extra):
    frame = Frame((), (this, ys, cur), "List", "append", 4)
    return reduce(APPEND, AbstractState(heap=heap, frames=(frame,), **extra))


def first_arrival():
    # cur = this = List(next=o3, val=i1), ys = o2
    heap = {1: cell(Address(3), IntVar(1)), 2: ClassVar("List"), 3: ClassVar("List")}
    return loop_head(heap, Address(1), Address(2), Address(1), next_id=2)


def second_arrival():
    # this = List(next=o4, val=i1), cur = o4 = List(next=o3, val=i2)
    heap = {
        1: cell(Address(4), IntVar(1)),
        2: ClassVar("List"),
        3: ClassVar("List"),
        4: cell(Address(3), IntVar(2)),
    }
    return loop_head(heap, Address(1), Address(2), Address(4), next_id=3)


def third_arrival():
    # this = List(next=o4, val=i1), o4 = List(next=o5, val=i2), cur = o5 = List(next=o3, val=i3)
    heap = {
        1: cell(Address(4), IntVar(1)),
        2: ClassVar("List"),
        3: ClassVar("List"),
        4: cell(Address(5), IntVar(2)),
        5: cell(Address(3), IntVar(3)),
    }
    return loop_head(heap, Address(1), Address(2), Address(5), next_id=4)


def loop_summary():
    # this = List(next=o2, val=i1), ys = o3, cur = o4 = List(next=o5, val=i2)
    heap = {
        1: cell(Address(2), IntVar(1)),
        2: ClassVar("List"),
        3: ClassVar("List"),
        4: cell(Address(5), IntVar(2)),
        5: ClassVar("List"),
    }
    return loop_head(heap, Address(1), Address(3), Address(4), next_id=3)


def concrete_list_state(values, ys_values, cur_index):
    heap = {}
    for ref, value in enumerate(values, start=1):
        heap[ref] = cell(Address(ref + 1) if ref < len(values) else NULL, IntValue(value))
    ys = NULL
    base = len(values)
    for offset, value in enumerate(ys_values, start=1):
        following = Address(base + offset + 1) if offset < len(ys_values) else NULL
        heap[base + offset] = cell(following, IntValue(value))
    if ys_values:
        ys = Address(base + 1)
    cur = Address(min(cur_index, len(values) - 1) + 1)
    frame = Frame((), (Address(1), ys, cur), "List", "append", 4)
    return JvmState(heap, (frame,))


def open_list_state(values, cur_index, ys_known, keep_apart):
    """``this`` is a prefix of cells ending in an unknown list.

    ``values`` gives each cell's value, ``None`` for an unknown integer. ``cur``
    points into the prefix, or at an unknown list of its own once
    ``cur_index`` runs past it.
    """

    heap, next_id = {}, 1
    for ref, value in enumerate(values, start=1):
        if value is None:
            val, next_id = IntVar(next_id), next_id + 1
        else:
            val = IntValue(value)
        heap[ref] = cell(Address(ref + 1), val)
    tail = len(values) + 1
    heap[tail] = ClassVar("List")
    ys = NULL
    if ys_known:
        heap[tail + 1] = ClassVar("List")
        ys = Address(tail + 1)
    if cur_index < len(values):
        cur = Address(cur_index + 1)
    else:
        heap[tail + 2] = ClassVar("List")
        cur = Address(tail + 2)
    annotations = frozenset({frozenset({1, ys.ref})}) if keep_apart and ys_known else frozenset()
    frame = Frame((), (Address(1), ys, cur), "List", "append", 4)
    return AbstractState(heap=heap, frames=(frame,), annotations=annotations, next_id=next_id)


small_ints = st.integers(min_value=-3, max_value=3)
list_states = st.builds(
    concrete_list_state,
    st.lists(small_ints, min_size=1, max_size=4),
    st.lists(small_ints, max_size=2),
    st.integers(min_value=0, max_value=3),
)
open_list_states = st.builds(
    open_list_state,
    st.lists(st.none() | small_ints, max_size=3),
    st.integers(min_value=0, max_value=3),
    st.booleans(),
    st.booleans(),
)
abstract_states = open_list_states | list_states.map(beta)


def test_both_loop_arrivals_are_instances_of_their_join():
    a, b = first_arrival(), second_arrival()
    s = join(APPEND, a, b)

    assert s.is_proper
    assert instance_of(APPEND, a, s) is not None
    assert instance_of(APPEND, b, s) is not None
    assert instance_of(APPEND, s, a) is None


def test_join_separates_this_from_cur():
    s = join(APPEND, first_arrival(), second_arrival())
    this, _, cur = s.current.registers
    assert this != cur
    assert isinstance(s.content(this.ref), ObjectRecord)
    assert isinstance(s.content(s.content(this.ref).field(NEXT).ref), ClassVar)
    assert isinstance(s.content(this.ref).field(VAL), IntVar)


def test_join_is_idempotent_and_absorbs_its_inputs():
    a, b = first_arrival(), second_arrival()
    s = join(APPEND, a, b)
    assert equivalent(APPEND, join(APPEND, s, s), s)
    assert equivalent(APPEND, join(APPEND, s, a), s)
    assert equivalent(APPEND, join(APPEND, b, a), s)


def test_join_with_bottom_and_top():
    a = first_arrival()
    assert join(APPEND, AbstractState.bottom(), a) is a
    assert join(APPEND, a, AbstractState.top()).is_top


def test_join_of_different_locations_is_top():
    a = first_arrival()
    moved = AbstractState(heap=a.heap, frames=(Frame((), a.current.registers, "List", "append", 5),))
    assert join(APPEND, a, moved).is_top


def test_morphism_images_of_the_first_arrival():
    a, b = first_arrival(), second_arrival()
    s = join(APPEND, a, b)
    morphism = instance_of(APPEND, a, s)
    this, _, cur = s.current.registers
    assert morphism.image(this) == morphism.image(cur) == Address(1)


def test_annotated_pair_cannot_alias():
    heap = {1: ClassVar("List"), 2: ClassVar("List")}
    frame = Frame((), (Address(1), Address(2), NULL), "List", "append", 4)
    plain = AbstractState(heap=heap, frames=(frame,))
    assert can_alias(APPEND, plain, 1, 2)
    merged = unify(APPEND, plain, 1, 2)
    assert merged.current.registers[:2] == (Address(1), Address(1))
    assert set(merged.heap) == {1}

    annotated = AbstractState(heap=heap, frames=(frame,), annotations=frozenset({frozenset({1, 2})}))
    assert not can_alias(APPEND, annotated, 1, 2)
    assert unify(APPEND, annotated, 1, 2) is None


def test_unshared_regions_cannot_alias():
    heap = {1: ClassVar("List"), 2: ClassVar("List")}
    frame = Frame((), (Address(1), Address(2), NULL), "List", "append", 4)
    state = AbstractState(
        heap=heap,
        frames=(frame,),
        regions={1: frozenset({"this"}), 2: frozenset({"ys"})},
        assumptions=Assumptions(unshared=frozenset({frozenset({"this", "ys"})})),
    )
    assert not can_alias(APPEND, state, 1, 2)
    assert frozenset({1, 2}) in reduce(APPEND, state).annotations


def test_unify_with_conflicting_constants_fails():
    heap = {1: cell(NULL, IntValue(1)), 2: cell(NULL, IntValue(2))}
    frame = Frame((), (Address(1), Address(2), NULL), "List", "append", 4)
    state = AbstractState(heap=heap, frames=(frame,))
    assert unify(APPEND, state, 1, 2) is None
    assert frozenset({1, 2}) in reduce(APPEND, state).annotations


def test_distinct_unknowns_below_an_alias_meet_as_null():
    # o1 = List(next=o3), o2 = List(next=o4), o3 and o4 annotated
    heap = {
        1: cell(Address(3), IntValue(0)),
        2: cell(Address(4), IntValue(0)),
        3: ClassVar("List"),
        4: ClassVar("List"),
    }
    frame = Frame((), (Address(1), NULL, Address(2)), "List", "append", 4)
    state = AbstractState(heap=heap, frames=(frame,), annotations=frozenset({frozenset({3, 4})}))
    assert can_alias(APPEND, state, 1, 2)
    merged = unify(APPEND, state, 1, 2)
    assert set(merged.heap) == {1}
    assert merged.content(1).field(NEXT) == NULL
    assert merged.current.registers == (Address(1), NULL, Address(1))
    assert frozenset({1, 2}) not in reduce(APPEND, state).annotations


def test_distinct_instances_below_an_alias_block_it():
    heap = {
        1: cell(Address(3), IntValue(0)),
        2: cell(Address(4), IntValue(0)),
        3: cell(NULL, IntValue(5)),
        4: cell(NULL, IntValue(5)),
    }
    frame = Frame((), (Address(1), NULL, Address(2)), "List", "append", 4)
    state = AbstractState(heap=heap, frames=(frame,), annotations=frozenset({frozenset({3, 4})}))
    assert not can_alias(APPEND, state, 1, 2)
    assert unify(APPEND, state, 1, 2) is None


def test_join_of_lists_of_different_lengths_keeps_this_and_cur_aliasable():
    # left: this = cur, one cell; right: three cells with cur at the second
    left = concrete_list_state([0], [], 0)
    right = concrete_list_state([0, 0, 0], [], 1)
    joined = join(APPEND, beta(left), beta(right))
    this, _, cur = joined.current.registers
    assert this != cur
    assert not joined.annotated(this.ref, cur.ref)
    assert instance_of(APPEND, beta(left), joined) is not None
    assert instance_of(APPEND, beta(right), joined) is not None


def test_null_and_unit_join_to_an_unknown_object():
    heap = {1: cell(NULL, IntValue(0))}
    unset = AbstractState(heap=heap, frames=(Frame((), (Address(1), NULL, UNIT), "List", "append", 4),))
    empty = AbstractState(heap=heap, frames=(Frame((), (Address(1), NULL, NULL), "List", "append", 4),))
    joined = join(APPEND, unset, empty)
    local = joined.current.registers[2]
    assert joined.content(local.ref) == ClassVar("Object")
    assert instance_of(APPEND, unset, joined) is not None
    assert instance_of(APPEND, empty, joined) is not None


def test_join_of_the_first_two_arrivals_is_the_loop_summary():
    summary = loop_summary()
    assert equivalent(APPEND, join(APPEND, first_arrival(), second_arrival()), summary)

    third = third_arrival()
    assert instance_of(APPEND, third, summary) is not None
    assert instance_of(APPEND, summary, third) is None
    assert equivalent(APPEND, join(APPEND, summary, third), summary)


def test_beta_annotates_every_pair_and_drops_garbage():
    heap = {1: cell(Address(2), IntValue(1)), 2: cell(NULL, IntValue(2)), 3: cell(NULL, IntValue(3))}
    state = JvmState(heap, (Frame((), (Address(1), NULL, Address(2)), "List", "append", 4),))
    lifted = beta(state)
    assert set(lifted.heap) == {1, 2}
    assert lifted.annotations == frozenset({frozenset({1, 2})})
    assert abs_size(lifted) == state_size(JvmState({1: heap[1], 2: heap[2]}, state.frames))


def test_collect_garbage_keeps_reachable_objects():
    heap = {1: ClassVar("List"), 5: ClassVar("List")}
    frame = Frame((), (Address(1), NULL, NULL), "List", "append", 4)
    state = AbstractState(heap=heap, frames=(frame,), regions={5: frozenset({"ys"})})
    cleaned = collect_garbage(state)
    assert set(cleaned.heap) == {1}
    assert cleaned.regions == {}


def test_render_state_lists_frames_heap_and_annotations():
    text = render_state(second_arrival(), APPEND)
    lines = text.splitlines()
    assert lines[0] == "List.append 04 | ε | this=o1, ys=o2, l0=o4"
    assert "o1 = List(next=o4, val=i1)" in lines
    assert render_state(AbstractState.top()) == "TOP"


@settings(max_examples=500, deadline=None)
@given(list_states)
def test_instance_relation_is_reflexive(state):
    lifted = beta(state)
    assert instance_of(APPEND, lifted, lifted) is not None
    assert gamma_member(APPEND, state, lifted)


@settings(max_examples=500, deadline=None)
@given(list_states, list_states)
def test_join_is_an_upper_bound(left, right):
    joined = join(APPEND, beta(left), beta(right))
    assert joined.is_proper
    assert instance_of(APPEND, beta(left), joined) is not None
    assert instance_of(APPEND, beta(right), joined) is not None
    assert gamma_member(APPEND, left, joined)
    assert gamma_member(APPEND, right, joined)


@settings(max_examples=500, deadline=None)
@given(list_states, list_states, list_states)
def test_instance_relation_is_transitive_along_joins(first, second, third):
    lower = beta(first)
    middle = join(APPEND, lower, beta(second))
    upper = join(APPEND, middle, beta(third))
    assert instance_of(APPEND, lower, middle) is not None
    assert instance_of(APPEND, middle, upper) is not None
    assert instance_of(APPEND, lower, upper) is not None


@settings(max_examples=500, deadline=None)
@given(list_states, list_states)
def test_join_is_least_among_joins_of_its_inputs(left, right):
    joined = join(APPEND, beta(left), beta(right))
    again = join(APPEND, joined, beta(left))
    assert equivalent(APPEND, again, joined)


@settings(max_examples=500, deadline=None)
@given(list_states, list_states)
def test_reduce_is_idempotent(left, right):
    joined = join(APPEND, beta(left), beta(right))
    once = reduce(APPEND, joined)
    assert reduce(APPEND, once) == once


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=2, max_value=6))
def test_ascending_chain_stabilises(length):
    lattice = StateLattice(APPEND)
    chain = [beta(concrete_list_state([1], [], 0))]
    for size in range(2, length + 1):
        state = concrete_list_state([size] * size, [], 0)
        chain.append(lattice.join(chain[-1], lattice.beta(state)))
    for later in chain[1:]:
        assert lattice.equivalent(later, chain[1])
    sizes = [lattice.size(state) for state in chain[1:]]
    assert len(set(sizes)) == 1


@settings(max_examples=300, deadline=None)
@given(abstract_states, abstract_states)
def test_join_of_abstract_states_is_an_upper_bound(left, right):
    joined = join(APPEND, left, right)
    assert joined.is_proper
    assert instance_of(APPEND, left, joined) is not None
    assert instance_of(APPEND, right, joined) is not None


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(list_states, list_states, open_list_states)
def test_join_lies_below_every_common_upper_bound(left, right, bound):
    assume(instance_of(APPEND, beta(left), bound) is not None)
    assume(instance_of(APPEND, beta(right), bound) is not None)
    assert instance_of(APPEND, join(APPEND, beta(left), beta(right)), bound) is not None


@settings(max_examples=300, deadline=None)
@given(abstract_states, list_states, abstract_states)
def test_instance_relation_is_transitive_along_abstract_joins(first, second, third):
    middle = join(APPEND, first, beta(second))
    upper = join(APPEND, middle, third)
    assert instance_of(APPEND, first, upper) is not None
    assert instance_of(APPEND, beta(second), upper) is not None


@settings(max_examples=300, deadline=None)
@given(list_states, open_list_states)
def test_reduce_keeps_the_concretization(state, abstraction):
    assert gamma_member(APPEND, state, abstraction) == gamma_member(APPEND, state, reduce(APPEND, abstraction))


@settings(max_examples=300, deadline=None)
@given(list_states, list_states)
def test_reducing_a_join_without_annotations_keeps_its_inputs(left, right):
    stripped = replace(join(APPEND, beta(left), beta(right)), annotations=frozenset())
    rebuilt = reduce(APPEND, stripped)
    for state in (left, right):
        assert gamma_member(APPEND, state, stripped)
        assert gamma_member(APPEND, state, rebuilt)
