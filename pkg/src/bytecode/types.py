"""Declarations that make up a bytecode program.

Everything here is an immutable value. The :class:`~bytecode.program.Program`
class layers the derived relations (subtyping, field tables, method lookup)
on top of these records.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

__all__ = [
    "ClassDecl",
    "FieldDecl",
    "FieldSlot",
    "Instruction",
    "Literal",
    "MethodDecl",
    "Opcode",
    "Parameter",
    "TypeKind",
    "TypeRef",
]

OBJECT = "Object"


class TypeKind(str, Enum):
    BOOL = "bool"
    INT = "int"
    UNIT = "unit"
    NULL = "null"
    CLASS = "class"


_TYPE_ALIASES = {
    "bool": TypeKind.BOOL,
    "boolean": TypeKind.BOOL,
    "int": TypeKind.INT,
    "unit": TypeKind.UNIT,
    "void": TypeKind.UNIT,
    "null": TypeKind.NULL,
}


@dataclass(frozen=True, slots=True)
class TypeRef:
    """A Jinja type: a base type or a class name."""

    kind: TypeKind
    class_name: str | None = None

    @classmethod
    def parse(cls, text: str) -> "TypeRef":
        kind = _TYPE_ALIASES.get(text)
        if kind is not None:
            return cls(kind)
        return cls(TypeKind.CLASS, text)

    @classmethod
    def of_class(cls, name: str) -> "TypeRef":
        return cls(TypeKind.CLASS, name)

    @property
    def is_class(self) -> bool:
        return self.kind is TypeKind.CLASS

    def __str__(self) -> str:
        return self.class_name if self.kind is TypeKind.CLASS else self.kind.value


@dataclass(frozen=True, slots=True)
class Literal:
    """Operand of ``Push``: ``unit``, ``null``, a Boolean or an integer."""

    kind: TypeKind
    value: int | bool | None = None

    @classmethod
    def parse(cls, text: str) -> "Literal":
        if text == "unit":
            return cls(TypeKind.UNIT)
        if text == "null":
            return cls(TypeKind.NULL)
        if text in {"true", "false"}:
            return cls(TypeKind.BOOL, text == "true")
        try:
            return cls(TypeKind.INT, int(text))
        except ValueError:
            raise ValueError(f"Invalid literal {text!r}.") from None

    def __str__(self) -> str:
        if self.kind is TypeKind.BOOL:
            return "true" if self.value else "false"
        if self.kind is TypeKind.INT:
            return str(self.value)
        return self.kind.value


class Opcode(str, Enum):
    LOAD = "Load"
    STORE = "Store"
    PUSH = "Push"
    POP = "Pop"
    IADD = "IAdd"
    ISUB = "ISub"
    CMP_GEQ = "CmpGeq"
    CMP_EQ = "CmpEq"
    CMP_NEQ = "CmpNeq"
    AND = "And"
    OR = "Or"
    NOT = "Not"
    GOTO = "Goto"
    IF_FALSE = "IfFalse"
    NEW = "New"
    GETFIELD = "Getfield"
    PUTFIELD = "Putfield"
    CHECKCAST = "Checkcast"
    INVOKE = "Invoke"
    RETURN = "Return"

    @classmethod
    def lookup(cls, mnemonic: str) -> "Opcode":
        folded = mnemonic.casefold()
        for opcode in cls:
            if opcode.value.casefold() == folded:
                return opcode
        raise ValueError(f"Unknown instruction {mnemonic!r}.")


BINARY_OPCODES = frozenset(
    {
        Opcode.IADD,
        Opcode.ISUB,
        Opcode.CMP_GEQ,
        Opcode.CMP_EQ,
        Opcode.CMP_NEQ,
        Opcode.AND,
        Opcode.OR,
    }
)


@dataclass(frozen=True, slots=True)
class Instruction:
    """One bytecode instruction.

    ``index`` carries the numeric operand (register, jump offset or argument
    count), ``name`` the field or method name and ``class_name`` the class
    operand.
    """

    opcode: Opcode
    index: int | None = None
    literal: Literal | None = None
    name: str | None = None
    class_name: str | None = None

    @property
    def is_jump(self) -> bool:
        return self.opcode in (Opcode.GOTO, Opcode.IF_FALSE)

    def operands(self) -> tuple[str, ...]:
        if self.opcode is Opcode.PUSH:
            return (str(self.literal),)
        if self.opcode in (Opcode.GETFIELD, Opcode.PUTFIELD):
            return (self.name, self.class_name)
        if self.opcode is Opcode.INVOKE:
            return (self.name, str(self.index))
        if self.opcode in (Opcode.NEW, Opcode.CHECKCAST):
            return (self.class_name,)
        if self.index is not None:
            return (str(self.index),)
        return ()

    def __str__(self) -> str:
        return " ".join((self.opcode.value, *self.operands()))


@dataclass(frozen=True, slots=True)
class FieldDecl:
    name: str
    type: TypeRef


@dataclass(frozen=True, slots=True)
class Parameter:
    name: str
    type: TypeRef


@dataclass(frozen=True, slots=True)
class MethodDecl:
    """A method with its body (``max_locals`` excludes ``this`` and parameters)."""

    name: str
    params: tuple[Parameter, ...]
    result: TypeRef
    max_stack: int
    max_locals: int
    body: tuple[Instruction, ...]

    @property
    def param_types(self) -> tuple[TypeRef, ...]:
        return tuple(param.type for param in self.params)

    @property
    def register_count(self) -> int:
        return 1 + len(self.params) + self.max_locals


@dataclass(frozen=True, slots=True)
class ClassDecl:
    name: str
    superclass: str | None
    fields: tuple[FieldDecl, ...] = ()
    methods: tuple[MethodDecl, ...] = ()

    def find_field(self, name: str) -> FieldDecl | None:
        return next((field for field in self.fields if field.name == name), None)

    def find_method(self, name: str) -> MethodDecl | None:
        return next((method for method in self.methods if method.name == name), None)


class FieldSlot(NamedTuple):
    """Entry of a field table domain: defining class, field name and type."""

    owner: str
    name: str
    type: TypeRef

    @property
    def ref(self) -> tuple[str, str]:
        return (self.owner, self.name)
