"""Jinja values as they appear on operand stacks, in registers and in fields."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from bytecode import Literal, TypeKind, TypeRef

__all__ = [
    "NULL",
    "UNIT",
    "Address",
    "BoolValue",
    "IntValue",
    "NullValue",
    "UnitValue",
    "Value",
    "default_value",
    "from_literal",
    "is_reference",
]


@dataclass(frozen=True, slots=True)
class IntValue:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class BoolValue:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True, slots=True)
class UnitValue:
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True, slots=True)
class NullValue:
    def __str__(self) -> str:
        return "null"


@dataclass(frozen=True, slots=True, order=True)
class Address:
    """A heap reference; only meaningful relative to a heap."""

    ref: int

    def __str__(self) -> str:
        return f"o{self.ref}"


UNIT = UnitValue()
NULL = NullValue()

Value = Union[IntValue, BoolValue, UnitValue, NullValue, Address]


def from_literal(literal: Literal) -> Value:
    """The value pushed by ``Push`` for ``literal``."""

    if literal.kind is TypeKind.INT:
        return IntValue(int(literal.value))
    if literal.kind is TypeKind.BOOL:
        return BoolValue(bool(literal.value))
    if literal.kind is TypeKind.NULL:
        return NULL
    return UNIT


def default_value(type_ref: TypeRef) -> Value:
    """Initial field value for ``New``: 0, false, null or unit."""

    if type_ref.kind is TypeKind.INT:
        return IntValue(0)
    if type_ref.kind is TypeKind.BOOL:
        return BoolValue(False)
    if type_ref.kind is TypeKind.UNIT:
        return UNIT
    return NULL


def is_reference(value: object) -> bool:
    return isinstance(value, (Address, NullValue))
