"""Lightweight bytecode verification.

The checks mirror what a bytecode verifier guarantees for well-formed
programs: a unique, bounded stack height per program counter, jump targets
inside the body, registers written before they are read, declared classes in
every type, resolvable field and method references, and an acyclic call
graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict

import networkx as nx

from .program import Program, ProgramError
from .types import BINARY_OPCODES, Instruction, MethodDecl, Opcode, TypeRef

__all__ = ["Diagnostic", "DiagnosticKind", "check_wellformed", "stack_heights"]

LOGGER = logging.getLogger(__name__)


class DiagnosticKind(str, Enum):
    BODY = "body"
    STACK = "stack"
    JUMP = "jump"
    REGISTER = "register"
    REFERENCE = "reference"
    RECURSION = "recursion"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """A single verification finding, located by method and pc."""

    class_name: str
    method_name: str
    pc: int
    kind: DiagnosticKind
    message: str

    def as_dict(self) -> Dict[str, object]:
        return {
            "class": self.class_name,
            "method": self.method_name,
            "pc": self.pc,
            "kind": self.kind.value,
            "message": self.message,
        }

    def __str__(self) -> str:
        return (
            f"{self.class_name}.{self.method_name} pc {self.pc:02d}: "
            f"{self.kind.value}: {self.message}"
        )


def stack_effect(instruction: Instruction) -> tuple[int, int]:
    """Number of operand-stack entries popped and pushed."""

    opcode = instruction.opcode
    if opcode in (Opcode.LOAD, Opcode.PUSH, Opcode.NEW):
        return 0, 1
    if opcode in (Opcode.STORE, Opcode.POP, Opcode.IF_FALSE, Opcode.RETURN):
        return 1, 0
    if opcode in BINARY_OPCODES:
        return 2, 1
    if opcode in (Opcode.NOT, Opcode.GETFIELD, Opcode.CHECKCAST):
        return 1, 1
    if opcode is Opcode.PUTFIELD:
        return 2, 0
    if opcode is Opcode.INVOKE:
        return instruction.index + 1, 1
    return 0, 0


def successors(pc: int, instruction: Instruction) -> tuple[int, ...]:
    if instruction.opcode is Opcode.RETURN:
        return ()
    if instruction.opcode is Opcode.GOTO:
        return (pc + instruction.index,)
    if instruction.opcode is Opcode.IF_FALSE:
        return (pc + 1, pc + instruction.index)
    return (pc + 1,)


class _MethodChecker:
    def __init__(self, owner: str, method: MethodDecl) -> None:
        self.owner = owner
        self.method = method
        self.heights: dict[int, int] = {}
        self.diagnostics: dict[tuple, Diagnostic] = {}

    def report(self, pc: int, kind: DiagnosticKind, message: str) -> None:
        key = (pc, kind, message)
        if key not in self.diagnostics:
            self.diagnostics[key] = Diagnostic(self.owner, self.method.name, pc, kind, message)

    def run(self) -> "_MethodChecker":
        body = self.method.body
        if not body:
            self.report(0, DiagnosticKind.BODY, "empty method body")
            return self
        registers = self.method.register_count
        self.heights = {0: 0}
        assigned: dict[int, frozenset[int]] = {0: frozenset(range(1 + len(self.method.params)))}
        pending = [0]
        while pending:
            pc = pending.pop()
            instruction = body[pc]
            height = self.heights[pc]
            defined = assigned[pc]
            pops, pushes = stack_effect(instruction)
            if height < pops:
                self.report(
                    pc, DiagnosticKind.STACK, f"stack underflow: {instruction} needs {pops}, has {height}"
                )
                continue
            after = height - pops + pushes
            if after > self.method.max_stack:
                self.report(
                    pc,
                    DiagnosticKind.STACK,
                    f"stack height {after} exceeds MaxStack {self.method.max_stack}",
                )
            if instruction.opcode in (Opcode.LOAD, Opcode.STORE):
                index = instruction.index
                if index >= registers:
                    self.report(
                        pc, DiagnosticKind.REGISTER, f"register {index} out of range (0..{registers - 1})"
                    )
                    continue
                if instruction.opcode is Opcode.LOAD and index not in defined:
                    self.report(pc, DiagnosticKind.REGISTER, f"register {index} read before written")
                if instruction.opcode is Opcode.STORE:
                    defined = defined | {index}
            for target in successors(pc, instruction):
                if not 0 <= target < len(body):
                    what = "falls off the end of the body" if target == len(body) else (
                        f"jump target {target} out of range"
                    )
                    self.report(pc, DiagnosticKind.JUMP, what)
                    continue
                if target not in self.heights:
                    self.heights[target] = after
                    assigned[target] = defined
                    pending.append(target)
                    continue
                if self.heights[target] != after:
                    self.report(
                        target,
                        DiagnosticKind.STACK,
                        f"inconsistent stack height ({self.heights[target]} vs {after})",
                    )
                merged = assigned[target] & defined
                if merged != assigned[target]:
                    assigned[target] = merged
                    pending.append(target)
        return self


def stack_heights(method: MethodDecl, owner: str = "") -> dict[int, int]:
    """Stack height on entry to every reachable pc of ``method``."""

    return dict(_MethodChecker(owner, method).run().heights)


def check_wellformed(program: Program) -> list[Diagnostic]:
    """Verify every method of ``program``; an empty list means well-formed."""

    diagnostics: list[Diagnostic] = []
    for owner, method in program.methods():
        checker = _MethodChecker(owner, method).run()
        diagnostics.extend(checker.diagnostics.values())
        diagnostics.extend(_check_references(program, owner, method))
    diagnostics.extend(_check_types(program))
    diagnostics.extend(_check_recursion(program))
    LOGGER.debug("Verification produced %d diagnostics", len(diagnostics))
    return diagnostics


def _check_references(program: Program, owner: str, method: MethodDecl) -> list[Diagnostic]:
    found: list[Diagnostic] = []

    def report(pc: int, message: str) -> None:
        found.append(Diagnostic(owner, method.name, pc, DiagnosticKind.REFERENCE, message))

    for pc, instruction in enumerate(method.body):
        opcode = instruction.opcode
        if opcode in (Opcode.GETFIELD, Opcode.PUTFIELD):
            try:
                program.field_slot(instruction.class_name, instruction.name)
            except ProgramError as exc:
                report(pc, str(exc))
        elif opcode in (Opcode.NEW, Opcode.CHECKCAST):
            if not program.has_class(instruction.class_name):
                report(pc, f"unknown class {instruction.class_name!r}")
        elif opcode is Opcode.INVOKE:
            if not _call_targets(program, instruction):
                report(
                    pc,
                    f"no method {instruction.name!r} taking {instruction.index} argument(s)",
                )
    return found


def _check_types(program: Program) -> list[Diagnostic]:
    """Class names in field, parameter and result types must be declared."""

    found: list[Diagnostic] = []

    def unknown(ref: TypeRef) -> bool:
        return ref.is_class and not program.has_class(ref.class_name)

    for decl in program.classes.values():
        for field_decl in decl.fields:
            if unknown(field_decl.type):
                found.append(
                    Diagnostic(
                        decl.name,
                        field_decl.name,
                        0,
                        DiagnosticKind.REFERENCE,
                        f"field {field_decl.name} has unknown class {field_decl.type.class_name!r}",
                    )
                )
        for method in decl.methods:
            typed = [(f"parameter {param.name}", param.type) for param in method.params]
            typed.append(("result", method.result))
            for what, ref in typed:
                if unknown(ref):
                    found.append(
                        Diagnostic(
                            decl.name,
                            method.name,
                            0,
                            DiagnosticKind.REFERENCE,
                            f"{what} has unknown class {ref.class_name!r}",
                        )
                    )
    return found


def _call_targets(program: Program, instruction: Instruction) -> list[str]:
    return [
        f"{owner}.{decl.name}"
        for owner, decl in program.method_declarations(instruction.name)
        if len(decl.params) == instruction.index
    ]


def _check_recursion(program: Program) -> list[Diagnostic]:
    calls = nx.DiGraph()
    sites: list[tuple[str, str, int, str]] = []
    for owner, method in program.methods():
        caller = f"{owner}.{method.name}"
        calls.add_node(caller)
        for pc, instruction in enumerate(method.body):
            if instruction.opcode is not Opcode.INVOKE:
                continue
            for callee in _call_targets(program, instruction):
                calls.add_edge(caller, callee)
                sites.append((owner, method.name, pc, callee))

    cyclic: dict[str, frozenset[str]] = {}
    for component in nx.strongly_connected_components(calls):
        member = next(iter(component))
        if len(component) > 1 or calls.has_edge(member, member):
            for node in component:
                cyclic[node] = frozenset(component)

    found: list[Diagnostic] = []
    for owner, name, pc, callee in sites:
        caller = f"{owner}.{name}"
        if caller in cyclic and callee in cyclic[caller]:
            cycle = ", ".join(sorted(cyclic[caller]))
            found.append(
                Diagnostic(owner, name, pc, DiagnosticKind.RECURSION, f"recursive call cycle among {cycle}")
            )
    return found
