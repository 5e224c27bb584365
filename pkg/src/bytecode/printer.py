"""Pretty-printer producing the listing format read by :mod:`bytecode.parser`."""

from __future__ import annotations

from .program import Program
from .types import OBJECT, ClassDecl, MethodDecl

__all__ = ["render_method", "render_program"]


def render_program(program: Program) -> str:
    """Render ``program`` so that parsing the text yields an equal program.

    The implicit, member-less ``Object`` class is omitted.
    """

    blocks = [
        _render_class(decl)
        for decl in program.classes.values()
        if not (decl.name == OBJECT and not decl.fields and not decl.methods)
    ]
    return "\n".join(blocks)


def render_method(method: MethodDecl, indent: str = "") -> str:
    lines = [f"{indent}Method: {method.result} {method.name}"]
    if method.params:
        lines.append(f"{indent} Parameters:")
        lines.extend(f"{indent}  {param.type} {param.name}" for param in method.params)
    lines.append(f"{indent} Methodbody:")
    lines.append(f"{indent}  MaxStack: {method.max_stack}")
    lines.append(f"{indent}  MaxVars: {method.max_locals}")
    lines.append(f"{indent}  Bytecode:")
    for pc, instruction in enumerate(method.body):
        lines.append(f"{indent}   {pc:02d}: {instruction}")
    return "\n".join(lines)


def _render_class(decl: ClassDecl) -> str:
    lines = ["Class:", f" Name: {decl.name}", " Classbody:"]
    if decl.superclass is not None:
        lines.append(f"  Superclass: {decl.superclass}")
    if decl.fields:
        lines.append("  Fields:")
        lines.extend(f"   {field.type} {field.name}" for field in decl.fields)
    if decl.methods:
        lines.append("  Methods:")
        lines.extend(render_method(method, indent="   ") for method in decl.methods)
    return "\n".join(lines) + "\n"
