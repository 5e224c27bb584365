"""Tabular text rendering of abstract states."""

from __future__ import annotations

from bytecode import Program
from machine import Frame, ObjectRecord

from .state import AbstractState

__all__ = ["register_names", "render_state"]


def register_names(program: Program | None, frame: Frame) -> list[str]:
    """``this``, parameter names, then ``l0, l1, ...`` for the locals."""

    names = ["this"]
    if program is not None:
        method = program.class_decl(frame.class_name).find_method(frame.method_name)
        if method is not None:
            names.extend(param.name for param in method.params)
    names.extend(f"l{index}" for index in range(len(frame.registers) - len(names)))
    return names[: len(frame.registers)]


def _frame_line(program: Program | None, frame: Frame) -> str:
    stack = ", ".join(str(value) for value in frame.stack) or "ε"
    registers = ", ".join(
        f"{name}={value}" for name, value in zip(register_names(program, frame), frame.registers)
    )
    return f"{frame.class_name}.{frame.method_name} {frame.pc:02d} | {stack} | {registers}"


def render_state(state: AbstractState, program: Program | None = None) -> str:
    """Frames (entry first), heap, annotations and shape facts, one per line."""

    if state.is_top:
        return "TOP"
    if state.is_bottom:
        return "BOTTOM"
    lines = [_frame_line(program, frame) for frame in state.frames]
    objects = []
    variables = []
    for ref in sorted(state.heap):
        content = state.heap[ref]
        if isinstance(content, ObjectRecord):
            objects.append(f"o{ref} = {content}")
        else:
            variables.append(f"o{ref} = {content}")
    lines.extend(objects)
    if variables:
        lines.append(", ".join(variables))
    if state.annotations:
        lines.append(
            ", ".join(f"o{p} != o{q}" for p, q in sorted(tuple(sorted(pair)) for pair in state.annotations))
        )
    tagged = [f"o{ref}:{'+'.join(sorted(tags))}" for ref, tags in sorted(state.regions.items()) if tags]
    if tagged:
        lines.append("regions " + " ".join(tagged))
    if state.assumptions:
        lines.append(f"assume {state.assumptions}")
    return "\n".join(lines)
