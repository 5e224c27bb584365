"""Bytecode frontend: program model, parser, printer and verifier."""

from .parser import JbcSyntaxError, load_program, parse_instruction, parse_program
from .printer import render_method, render_program
from .program import MethodNotFoundError, Program, ProgramError
from .types import (
    OBJECT,
    ClassDecl,
    FieldDecl,
    FieldSlot,
    Instruction,
    Literal,
    MethodDecl,
    Opcode,
    Parameter,
    TypeKind,
    TypeRef,
)
from .verifier import Diagnostic, DiagnosticKind, check_wellformed, stack_heights

__all__ = [
    "OBJECT",
    "ClassDecl",
    "Diagnostic",
    "DiagnosticKind",
    "FieldDecl",
    "FieldSlot",
    "Instruction",
    "JbcSyntaxError",
    "Literal",
    "MethodDecl",
    "MethodNotFoundError",
    "Opcode",
    "Parameter",
    "Program",
    "ProgramError",
    "TypeKind",
    "TypeRef",
    "check_wellformed",
    "load_program",
    "parse_instruction",
    "parse_program",
    "render_method",
    "render_program",
    "stack_heights",
]
