"""Argument literals: textual descriptions of entry values and their heaps."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput

from bytecode import FieldSlot, Program, ProgramError, TypeKind, TypeRef

from .state import ObjectRecord
from .values import NULL, UNIT, Address, BoolValue, IntValue, NullValue, UnitValue, Value

__all__ = ["ArgumentError", "HeapBuilder", "parse_literal"]

LOGGER = logging.getLogger(__name__)

GRAMMAR_PATH = Path(__file__).with_name("literals.lark")


class ArgumentError(ValueError):
    """Malformed argument literal, wrong arity or ill-typed value."""


@dataclass(slots=True)
class ObjectLiteral:
    class_name: str
    fields: list[tuple[str, object]] = field(default_factory=list)
    label: int | None = None


@dataclass(frozen=True, slots=True)
class BackReference:
    label: int


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(GRAMMAR_PATH.read_text(encoding="utf-8"), parser="lalr")


class _LiteralBuilder(Transformer):
    def object(self, children):
        name, *fields = children
        return ObjectLiteral(str(name), [(name_, value) for name_, value in fields])

    def field(self, children):
        name, value = children
        return (str(name), value)

    def labelled(self, children):
        label, literal = children
        literal.label = int(label[1:])
        return literal

    def backref(self, children):
        return BackReference(int(children[0][1:]))

    def null(self, _):
        return NULL

    def unit(self, _):
        return UNIT

    def true(self, _):
        return BoolValue(True)

    def false(self, _):
        return BoolValue(False)

    def integer(self, children):
        return IntValue(int(children[0]))


def parse_literal(text: str) -> object:
    """Parse one argument literal into scalar values and object literals."""

    try:
        tree = _parser().parse(text)
    except UnexpectedInput as exc:
        raise ArgumentError(f"invalid argument literal {text!r}: {exc.__class__.__name__}") from None
    return _LiteralBuilder().transform(tree)


class HeapBuilder:
    """Allocate the objects described by argument literals into a fresh heap.

    Addresses are handed out in pre-order starting at 1. ``#k`` labels are
    visible to every literal materialized by the same builder, so later
    arguments can share or close cycles through earlier ones.
    """

    def __init__(self, program: Program) -> None:
        self.program = program
        self.heap: dict[int, ObjectRecord] = {}
        self._labels: dict[int, Address] = {}
        self._pending: list[tuple[int, ObjectLiteral]] = []

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def add(self, text: str, expected: TypeRef) -> Value:
        """Materialize ``text`` and check it against ``expected``."""

        literal = parse_literal(text)
        value = self._resolve(self._allocate(literal))
        self._check(value, expected, f"argument {text!r}")
        return value

    def finish(self) -> dict[int, ObjectRecord]:
        """Fill every allocated object's fields once all labels are known."""

        for ref, literal in self._pending:
            self.heap[ref] = self._build_record(literal)
        self._pending.clear()
        return self.heap

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _allocate(self, literal: object) -> object:
        if isinstance(literal, BackReference):
            return literal
        if not isinstance(literal, ObjectLiteral):
            return literal
        if not self.program.has_class(literal.class_name):
            raise ArgumentError(f"unknown class {literal.class_name!r} in argument literal")
        ref = len(self.heap) + 1
        self.heap[ref] = ObjectRecord(literal.class_name)
        address = Address(ref)
        if literal.label is not None:
            if literal.label in self._labels:
                raise ArgumentError(f"label #{literal.label} defined twice")
            self._labels[literal.label] = address
        self._pending.append((ref, literal))
        literal.fields = [(name, self._allocate(value)) for name, value in literal.fields]
        return address

    def _resolve(self, value: object) -> Value:
        if isinstance(value, BackReference):
            try:
                return self._labels[value.label]
            except KeyError:
                raise ArgumentError(f"reference @{value.label} has no matching #{value.label}") from None
        return value

    def _build_record(self, literal: ObjectLiteral) -> ObjectRecord:
        domain = self.program.field_table_domain(literal.class_name)
        given: dict[tuple[str, str], Value] = {}
        for name, value in literal.fields:
            slot = self._find_slot(literal.class_name, name)
            if slot.ref in given:
                raise ArgumentError(f"field {name!r} given twice for {literal.class_name}")
            resolved = self._resolve(value)
            self._check(resolved, slot.type, f"field {slot.owner}.{slot.name}")
            given[slot.ref] = resolved
        template = ObjectRecord.default(self.program, literal.class_name)
        return ObjectRecord(
            literal.class_name,
            tuple((slot.ref, given.get(slot.ref, template.field(slot.ref))) for slot in domain),
        )

    def _find_slot(self, class_name: str, name: str) -> FieldSlot:
        domain = self.program.field_table_domain(class_name)
        if "." in name:
            owner, _, field_name = name.partition(".")
            matches = [slot for slot in domain if slot.owner == owner and slot.name == field_name]
        else:
            matches = [slot for slot in domain if slot.name == name]
        if not matches:
            raise ArgumentError(f"class {class_name} has no field {name!r}")
        if len(matches) > 1:
            raise ArgumentError(f"field {name!r} of {class_name} is ambiguous; qualify it as Owner.{name}")
        return matches[0]

    def _check(self, value: object, expected: TypeRef, what: str) -> None:
        value = self._resolve(value) if isinstance(value, BackReference) else value
        kind = expected.kind
        ok = (
            (kind is TypeKind.INT and isinstance(value, IntValue))
            or (kind is TypeKind.BOOL and isinstance(value, BoolValue))
            or (kind is TypeKind.UNIT and isinstance(value, UnitValue))
            or (kind is TypeKind.NULL and isinstance(value, NullValue))
            or (kind is TypeKind.CLASS and isinstance(value, NullValue))
        )
        if not ok and kind is TypeKind.CLASS and isinstance(value, Address):
            try:
                ok = self.program.is_subclass(self.heap[value.ref].class_name, expected.class_name)
            except ProgramError as exc:
                raise ArgumentError(str(exc)) from None
        if not ok:
            raise ArgumentError(f"{what}: value {value} is not of type {expected}")
        LOGGER.debug("Checked %s against %s", what, expected)
