"""Least upper bound of two abstract states."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Union

from bytecode import OBJECT, Program, TypeKind
from machine import Address, Frame, NullValue, ObjectRecord, UnitValue

from .state import AbstractState, collect_garbage
from .unify import can_alias, reduce
from .values import BoolVar, ClassVar, IntVar, value_kind

__all__ = ["join"]

LOGGER = logging.getLogger(__name__)

# An address of one of the two inputs, or the null/unit sentinel standing in
# for a reference position that holds no object.
_Key = Union[int, str]


class _Incompatible(Exception):
    pass


def _key(value: object) -> _Key | None:
    if isinstance(value, Address):
        return value.ref
    if isinstance(value, NullValue):
        return "null"
    if isinstance(value, UnitValue):
        return "unit"
    return None


@dataclass(slots=True)
class _Joiner:
    program: Program
    left: AbstractState
    right: AbstractState
    heap: dict[int, object] = field(default_factory=dict)
    origin: dict[int, tuple[_Key, _Key]] = field(default_factory=dict)
    objects: dict[tuple[_Key, _Key], int] = field(default_factory=dict)
    variables: dict[tuple[object, object], object] = field(default_factory=dict)
    next_id: int = 1

    def value(self, a: object, b: object) -> object:
        key_a, key_b = _key(a), _key(b)
        if key_a is not None and key_b is not None and (isinstance(a, Address) or isinstance(b, Address)):
            return self.object(key_a, key_b)
        if a == b and not isinstance(a, (IntVar, BoolVar)):
            return a
        if {key_a, key_b} == {"null", "unit"}:
            return self.empty_reference(key_a, key_b)
        kinds = {value_kind(a), value_kind(b)} - {TypeKind.UNIT}
        if None in kinds or len(kinds) != 1:
            raise _Incompatible(f"{a} and {b}")
        kind = kinds.pop()
        var = self.variables.get((a, b))
        if var is None:
            var = IntVar(self.next_id) if kind is TypeKind.INT else BoolVar(self.next_id)
            self.next_id += 1
            self.variables[(a, b)] = var
        return var

    def object(self, key_a: _Key, key_b: _Key) -> Address:
        known = self.objects.get((key_a, key_b))
        if known is not None:
            return Address(known)
        ref = len(self.origin) + 1
        self.objects[(key_a, key_b)] = ref
        self.origin[ref] = (key_a, key_b)
        content_a = self.left.content(key_a) if isinstance(key_a, int) else None
        content_b = self.right.content(key_b) if isinstance(key_b, int) else None
        if content_a is None and content_b is None:
            self.heap[ref] = ClassVar(OBJECT)
        elif content_a is None or content_b is None:
            self.heap[ref] = ClassVar((content_a or content_b).class_name)
        elif (
            isinstance(content_a, ObjectRecord)
            and isinstance(content_b, ObjectRecord)
            and content_a.class_name == content_b.class_name
        ):
            self.heap[ref] = ClassVar(content_a.class_name)
            try:
                fields = [
                    (field_ref, self.value(x, y))
                    for (field_ref, x), y in zip(content_a.fields, content_b.values())
                ]
            except _Incompatible as exc:
                LOGGER.debug("Fields of o%d stay abstract: %s", ref, exc)
            else:
                self.heap[ref] = ObjectRecord(content_a.class_name, tuple(fields))
        else:
            self.heap[ref] = ClassVar(self.program.lub_class([content_a.class_name, content_b.class_name]))
        return Address(ref)

    def empty_reference(self, key_a: _Key, key_b: _Key) -> Address:
        """A position holding ``null`` on one side and ``unit`` on the other.

        No class is known on either side, so the position becomes an
        unknown ``Object``; a class variable instantiates to either value.
        """

        LOGGER.debug("Generalizing %s and %s to an unknown %s", key_a, key_b, OBJECT)
        return self.object(key_a, key_b)

    def tags(self, ref: int) -> frozenset[str]:
        key_a, key_b = self.origin[ref]
        if isinstance(key_a, int) and isinstance(key_b, int):
            return self.left.tags(key_a) & self.right.tags(key_b)
        if isinstance(key_a, int):
            return self.left.tags(key_a)
        if isinstance(key_b, int):
            return self.right.tags(key_b)
        return frozenset()

    def distinct(self, state: AbstractState, x: _Key, y: _Key) -> bool:
        if not (isinstance(x, int) and isinstance(y, int)):
            return True
        if x == y:
            return False
        return state.annotated(x, y) or state.separated(x, y) or not can_alias(self.program, state, x, y)

    def annotations(self) -> frozenset[frozenset[int]]:
        found = set()
        refs = sorted(self.heap)
        for index, p in enumerate(refs):
            for q in refs[index + 1 :]:
                (a1, b1), (a2, b2) = self.origin[p], self.origin[q]
                if self.distinct(self.left, a1, a2) and self.distinct(self.right, b1, b2):
                    found.add(frozenset((p, q)))
        return frozenset(found)


def join(program: Program, left: AbstractState, right: AbstractState) -> AbstractState:
    """``left`` ⊔ ``right``, reduced.

    Corresponding nodes are paired: equal labels are kept, differing
    integers or Booleans become a variable shared by every position holding
    the same pair, and objects of different classes (or an object and
    ``null``) become a class variable. A field pair that cannot be
    generalized turns the enclosing object into a class variable; at a stack
    or register position it makes the join ⊤.
    """

    if left.is_bottom:
        return right
    if right.is_bottom:
        return left
    if left.is_top or right.is_top:
        return AbstractState.top()
    if left.locations != right.locations or any(
        len(a.stack) != len(b.stack) or len(a.registers) != len(b.registers)
        for a, b in zip(left.frames, right.frames)
    ):
        return AbstractState.top()

    joiner = _Joiner(program, left, right)
    frames: list[Frame] = []
    try:
        for a, b in zip(left.frames, right.frames):
            stack = tuple(joiner.value(x, y) for x, y in zip(a.stack, b.stack))
            registers = tuple(joiner.value(x, y) for x, y in zip(a.registers, b.registers))
            frames.append(Frame(stack, registers, a.class_name, a.method_name, a.pc))
    except _Incompatible as exc:
        LOGGER.debug("Join collapses to top: %s", exc)
        return AbstractState.top()

    regions = {ref: tags for ref in joiner.heap if (tags := joiner.tags(ref))}
    joined = AbstractState(
        heap=joiner.heap,
        frames=tuple(frames),
        annotations=joiner.annotations(),
        regions=regions,
        assumptions=left.assumptions.meet(right.assumptions),
        next_id=joiner.next_id,
    )
    return reduce(program, collect_garbage(joined))
