"""Parser for the textual bytecode format (see ``jbc.lark``)."""

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from .program import Program, ProgramError
from .types import (
    OBJECT,
    ClassDecl,
    FieldDecl,
    Instruction,
    Literal,
    MethodDecl,
    Opcode,
    Parameter,
    TypeRef,
)

__all__ = ["JbcSyntaxError", "load_program", "parse_instruction", "parse_program"]

LOGGER = logging.getLogger(__name__)

GRAMMAR_PATH = Path(__file__).with_name("jbc.lark")

_REGISTER_OPS = {Opcode.LOAD, Opcode.STORE}
_JUMP_OPS = {Opcode.GOTO, Opcode.IF_FALSE}
_FIELD_OPS = {Opcode.GETFIELD, Opcode.PUTFIELD}
_CLASS_OPS = {Opcode.NEW, Opcode.CHECKCAST}


class JbcSyntaxError(ValueError):
    """A listing that does not follow the grammar or the operand rules."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(
        GRAMMAR_PATH.read_text(encoding="utf-8"),
        parser="lalr",
        propagate_positions=True,
    )


def parse_instruction(mnemonic: str, operands: list[str]) -> Instruction:
    """Build an instruction from its mnemonic and operand words."""

    opcode = Opcode.lookup(mnemonic)

    def expect(count: int) -> None:
        if len(operands) != count:
            raise ValueError(
                f"{opcode.value} expects {count} operand(s), got {len(operands)}."
            )

    def natural(text: str) -> int:
        value = int(text)
        if value < 0:
            raise ValueError(f"{opcode.value} expects a non-negative operand, got {value}.")
        return value

    if opcode in _REGISTER_OPS:
        expect(1)
        return Instruction(opcode, index=natural(operands[0]))
    if opcode in _JUMP_OPS:
        expect(1)
        return Instruction(opcode, index=int(operands[0]))
    if opcode is Opcode.PUSH:
        expect(1)
        return Instruction(opcode, literal=Literal.parse(operands[0]))
    if opcode in _FIELD_OPS:
        expect(2)
        return Instruction(opcode, name=operands[0], class_name=operands[1])
    if opcode in _CLASS_OPS:
        expect(1)
        return Instruction(opcode, class_name=operands[0])
    if opcode is Opcode.INVOKE:
        expect(2)
        return Instruction(opcode, name=operands[0], index=natural(operands[1]))
    expect(0)
    return Instruction(opcode)


class _ProgramBuilder(Transformer):
    def start(self, classes):
        return Program(classes)

    def class_decl(self, children):
        name, *sections = children
        superclass = None if str(name) == OBJECT else OBJECT
        fields: tuple[FieldDecl, ...] = ()
        methods: tuple[MethodDecl, ...] = ()
        for kind, payload in sections:
            if kind == "superclass":
                superclass = payload
            elif kind == "fields":
                fields = payload
            else:
                methods = payload
        return ClassDecl(str(name), superclass, fields, methods)

    def superclass(self, children):
        return ("superclass", str(children[0]))

    def fields(self, children):
        return ("fields", tuple(children))

    def field_decl(self, children):
        type_name, name = children
        return FieldDecl(str(name), TypeRef.parse(str(type_name)))

    def methods(self, children):
        return ("methods", tuple(children))

    def parameters(self, children):
        return tuple(children)

    def param_decl(self, children):
        type_name, name = children
        return Parameter(str(name), TypeRef.parse(str(type_name)))

    def method_decl(self, children):
        result, name, *rest = children
        params: tuple[Parameter, ...] = ()
        if rest and isinstance(rest[0], tuple):
            params = rest.pop(0)
        max_stack, max_locals, *body = rest
        for expected, (label, instruction) in enumerate(body):
            if int(label[:-1]) != expected:
                raise JbcSyntaxError(
                    f"instruction label {label} out of sequence in method {name}, "
                    f"expected {expected:02d}",
                    label.line,
                    label.column,
                )
        return MethodDecl(
            name=str(name),
            params=params,
            result=TypeRef.parse(str(result)),
            max_stack=int(max_stack),
            max_locals=int(max_locals),
            body=tuple(instruction for _, instruction in body),
        )

    def instruction(self, children):
        label, mnemonic, *operands = children
        try:
            instruction = parse_instruction(str(mnemonic), [str(op) for op in operands])
        except ValueError as exc:
            raise JbcSyntaxError(str(exc), mnemonic.line, mnemonic.column) from exc
        return (label, instruction)


def parse_program(text: str) -> Program:
    """Parse a listing into a :class:`Program`.

    Raises
    ------
    JbcSyntaxError
        The text does not follow the grammar (position included).
    ProgramError
        Declarations are inconsistent (duplicates, unknown superclass).
    """

    text = text.replace("\r\n", "\n")
    try:
        tree = _parser().parse(text)
    except UnexpectedInput as exc:
        line = max(getattr(exc, "line", 0), 0)
        column = max(getattr(exc, "column", 0), 0)
        raise JbcSyntaxError(_describe(exc), line, column) from None
    try:
        program = _ProgramBuilder().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, (JbcSyntaxError, ProgramError)):
            raise exc.orig_exc from None
        raise
    LOGGER.debug("Parsed program with classes %s", ", ".join(program.classes))
    return program


def load_program(path: str | Path) -> Program:
    return parse_program(Path(path).read_text(encoding="utf-8"))


def _describe(exc: UnexpectedInput) -> str:
    token = getattr(exc, "token", None)
    if isinstance(token, Token):
        if token.type == "$END":
            return "unexpected end of input"
        return f"unexpected token {str(token)!r}"
    char = getattr(exc, "char", None)
    if char is not None:
        return f"unexpected character {char!r}"
    return "unexpected end of input"
