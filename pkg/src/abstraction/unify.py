"""Alias unification and the reduction operator.

Unifying two addresses ``p`` and ``q`` builds the most general instance of a
state in which both denote the same object. Merging objects forces their
fields to merge as well, so the attempt propagates through the heap with a
union-find over cells: addresses, integer and Boolean variables, and
constants. The attempt fails when two merged cells carry incompatible
labels or when an annotated (or assumption-separated) pair would have to be
one object; unknown objects of such a pair may still both become ``null``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Hashable

from networkx.utils import UnionFind

from bytecode import Program
from machine import NULL, Address, BoolValue, IntValue, NullValue, ObjectRecord, UnitValue

from .state import AbstractState, collect_garbage, pairs
from .values import BoolVar, ClassVar, IntVar

__all__ = ["UnificationError", "can_alias", "reduce", "unify"]

LOGGER = logging.getLogger(__name__)


class UnificationError(Exception):
    """Internal signal: the cells cannot denote the same value."""


@dataclass(slots=True)
class _Info:
    sort: str
    content: object = None
    constant: object = None


def _cell(value: object) -> Hashable:
    if isinstance(value, Address):
        return ("addr", value.ref)
    return value


def _sort(value: object) -> str:
    if isinstance(value, (Address, NullValue)):
        return "ref"
    if isinstance(value, (IntValue, IntVar)):
        return "int"
    if isinstance(value, (BoolValue, BoolVar)):
        return "bool"
    if isinstance(value, UnitValue):
        return "unit"
    raise TypeError(f"cannot unify value {value!r}")


class _Unifier:
    def __init__(self, program: Program, state: AbstractState) -> None:
        self.program = program
        self.state = state
        self.sets = UnionFind()
        self.info: dict[Hashable, _Info] = {}

    def info_of(self, value: object) -> tuple[Hashable, _Info]:
        cell = _cell(value)
        root = self.sets[cell]
        if root not in self.info:
            if isinstance(value, Address):
                self.info[root] = _Info("ref", content=self.state.content(value.ref))
            elif isinstance(value, (IntVar, BoolVar)):
                self.info[root] = _Info(_sort(value))
            else:
                self.info[root] = _Info(_sort(value), constant=value)
        return root, self.info[root]

    def equate(self, left: object, right: object) -> None:
        pending = [(left, right)]
        while pending:
            a, b = pending.pop()
            root_a, info_a = self.info_of(a)
            root_b, info_b = self.info_of(b)
            if root_a == root_b:
                continue
            if info_a.sort != info_b.sort:
                raise UnificationError(f"{a} and {b} have different sorts")
            merged = self._merge(info_a, info_b, pending)
            self.sets.union(root_a, root_b)
            root = self.sets[root_a]
            self.info.pop(root_a, None)
            self.info.pop(root_b, None)
            self.info[root] = merged

    def _merge(self, a: _Info, b: _Info, pending: list) -> _Info:
        if a.constant is not None and b.constant is not None and a.constant != b.constant:
            raise UnificationError(f"constants {a.constant} and {b.constant} differ")
        constant = a.constant if a.constant is not None else b.constant
        if a.sort != "ref":
            return _Info(a.sort, constant=constant)
        if constant is NULL or isinstance(constant, NullValue):
            for info in (a, b):
                if isinstance(info.content, ObjectRecord):
                    raise UnificationError("an instance cannot be null")
            return _Info("ref", constant=NULL)
        return _Info("ref", content=self._merge_content(a.content, b.content, pending))

    def _merge_content(self, a: object, b: object, pending: list) -> object:
        if isinstance(a, ClassVar) and isinstance(b, ClassVar):
            if self.program.is_subclass(a.class_name, b.class_name):
                return a
            if self.program.is_subclass(b.class_name, a.class_name):
                return b
            raise UnificationError(f"classes {a.class_name} and {b.class_name} are unrelated")
        if isinstance(a, ObjectRecord) and isinstance(b, ClassVar):
            a, b = b, a
        if isinstance(a, ClassVar) and isinstance(b, ObjectRecord):
            if not self.program.is_subclass(b.class_name, a.class_name):
                raise UnificationError(f"{b.class_name} is not a subclass of {a.class_name}")
            return b
        if a.class_name != b.class_name:
            raise UnificationError(f"instances of {a.class_name} and {b.class_name}")
        pending.extend(zip(a.values(), b.values()))
        return a

    def partition(self, aliased: int) -> tuple[dict[Hashable, list[int]], dict[int, object]]:
        """Group addresses by class and pick each group's image.

        A group holding two addresses that must stay distinct can still be
        ``null`` when it only holds unknown objects. The group of the
        ``aliased`` address always denotes an object.
        """

        state = self.state
        groups: dict[Hashable, list[int]] = {}
        for ref in state.heap:
            groups.setdefault(self.sets[("addr", ref)], []).append(ref)
        representative: dict[int, object] = {}
        for root, refs in groups.items():
            info = self.info.get(root)
            if info is not None and info.constant is not None:
                image: object = NULL
            elif self._kept_apart(refs):
                content = info.content if info is not None else state.heap[refs[0]]
                if root == self.sets[("addr", aliased)] or isinstance(content, ObjectRecord):
                    raise UnificationError(f"o{min(refs)} and its group must stay distinct")
                LOGGER.debug("Distinct unknowns %s can only meet as null", sorted(refs))
                image = NULL
            else:
                image = Address(min(refs))
            for ref in refs:
                representative[ref] = image
        return groups, representative

    def _kept_apart(self, refs: list[int]) -> bool:
        state = self.state
        return any(state.annotated(p, q) or state.separated(p, q) for p, q in pairs(refs))

    def result(self, aliased: int) -> AbstractState:
        state = self.state
        groups, representative = self.partition(aliased)

        def image_of(value: object) -> object:
            if isinstance(value, Address):
                return representative[value.ref]
            if isinstance(value, (IntVar, BoolVar)):
                root = self.sets[value]
                info = self.info.get(root)
                if info is not None and info.constant is not None:
                    return info.constant
                return root if isinstance(root, (IntVar, BoolVar)) else value
            return value

        heap: dict[int, object] = {}
        regions: dict[int, frozenset[str]] = {}
        for root, refs in groups.items():
            image = representative[refs[0]]
            if not isinstance(image, Address):
                continue
            info = self.info.get(root)
            content = info.content if info is not None else state.heap[refs[0]]
            if isinstance(content, ObjectRecord):
                content = content.map_values(image_of)
            heap[image.ref] = content
            tags = frozenset().union(*(state.tags(ref) for ref in refs))
            if tags:
                regions[image.ref] = tags
        annotations = set()
        for pair in state.annotations:
            p, q = (representative[ref] for ref in sorted(pair))
            if isinstance(p, Address) and isinstance(q, Address) and p != q:
                annotations.add(frozenset((p.ref, q.ref)))
        merged = replace(
            state,
            heap=heap,
            frames=tuple(frame.map_values(image_of) for frame in state.frames),
            annotations=frozenset(annotations),
            regions=regions,
        )
        return collect_garbage(merged)


def unify(program: Program, state: AbstractState, p: int, q: int) -> AbstractState | None:
    """The state in which ``p`` and ``q`` alias, or ``None`` when they cannot.

    Distinct addresses are represented by the smaller one; an address merged
    with ``null`` disappears and every occurrence becomes ``null``.
    """

    if p == q:
        return state
    unifier = _Unifier(program, state)
    try:
        unifier.equate(Address(p), Address(q))
        return unifier.result(p)
    except UnificationError as exc:
        LOGGER.debug("o%d and o%d cannot alias: %s", p, q, exc)
        return None


def can_alias(program: Program, state: AbstractState, p: int, q: int) -> bool:
    """Whether some instance of ``state`` lets ``p`` and ``q`` be one object."""

    if p == q:
        return True
    unifier = _Unifier(program, state)
    try:
        unifier.equate(Address(p), Address(q))
        unifier.partition(p)
    except UnificationError:
        return False
    return True


def reduce(program: Program, state: AbstractState) -> AbstractState:
    """Annotate every pair of addresses that cannot alias."""

    if not state.is_proper:
        return state
    added = {
        frozenset((p, q))
        for p, q in pairs(state.heap)
        if not state.annotated(p, q) and not can_alias(program, state, p, q)
    }
    if not added:
        return state
    return replace(state, annotations=state.annotations | added)
