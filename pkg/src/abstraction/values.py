"""Abstract variables: unknown integers, Booleans and objects."""

from __future__ import annotations

from dataclasses import dataclass

from bytecode import TypeKind, TypeRef
from machine import BoolValue, IntValue, UnitValue

__all__ = ["BoolVar", "ClassVar", "IntVar", "is_variable", "value_kind", "variable_for"]


@dataclass(frozen=True, slots=True, order=True)
class IntVar:
    ident: int

    def __str__(self) -> str:
        return f"i{self.ident}"


@dataclass(frozen=True, slots=True, order=True)
class BoolVar:
    ident: int

    def __str__(self) -> str:
        return f"b{self.ident}"


@dataclass(frozen=True, slots=True)
class ClassVar:
    """An unknown instance of ``class_name`` or a subclass, possibly null.

    A class variable lives in the heap; its identity is the address that
    maps to it.
    """

    class_name: str

    def __str__(self) -> str:
        return self.class_name[:1].lower() + self.class_name[1:]


def is_variable(value: object) -> bool:
    return isinstance(value, (IntVar, BoolVar))


def value_kind(value: object) -> TypeKind | None:
    """Base type of a non-reference value, ``None`` for references."""

    if isinstance(value, (IntValue, IntVar)):
        return TypeKind.INT
    if isinstance(value, (BoolValue, BoolVar)):
        return TypeKind.BOOL
    if isinstance(value, UnitValue):
        return TypeKind.UNIT
    return None


def variable_for(type_ref: TypeRef, ident: int) -> IntVar | BoolVar | None:
    if type_ref.kind is TypeKind.INT:
        return IntVar(ident)
    if type_ref.kind is TypeKind.BOOL:
        return BoolVar(ident)
    return None
