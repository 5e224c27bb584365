"""Rules for the edges of a computation graph."""

from __future__ import annotations

import logging

from abstraction import AbstractState, ClassVar
from bytecode import Opcode, Program
from computation import ComputationGraph, node_title
from machine import Address
from shape import ShapeOracle
from symbolic import EdgeKind, EdgeLabel, Truth

from .terms import Apply, Ctrs, Rule, SymbolKind
from .translation import TranslationContext

__all__ = ["RuleEmitter", "corr_rule", "emit_ctrs", "node_symbol", "updated_fresh_for"]

LOGGER = logging.getLogger(__name__)


def node_symbol(node: int) -> str:
    return f"f_{node}"


def updated_fresh_for(program: Program, oracle: ShapeOracle, state: AbstractState) -> frozenset[int]:
    """Unknown objects whose contents a field update in ``state`` may change.

    Empty unless the current instruction is ``Putfield`` on an object.
    """

    frame = state.current
    method = program.class_decl(frame.class_name).find_method(frame.method_name)
    if method is None or method.body[frame.pc].opcode is not Opcode.PUTFIELD:
        return frozenset()
    target = frame.peek(1)
    if not isinstance(target, Address):
        return frozenset()
    return frozenset(
        ref
        for ref, content in state.heap.items()
        if isinstance(content, ClassVar) and ref != target.ref and oracle.may_reach(state, ref, target.ref)
    )


class RuleEmitter:
    """Builds one constrained rule per computation-graph edge."""

    def __init__(self, program: Program, oracle: ShapeOracle | None = None) -> None:
        self.program = program
        self.oracle = oracle or ShapeOracle(program)

    def rule(self, graph: ComputationGraph, source: int, target: int, label: EdgeLabel) -> Rule:
        before, after = graph.state(source), graph.state(target)
        lhs_symbol, rhs_symbol = node_symbol(source), node_symbol(target)
        text = f"n{source} -> n{target} {label.kind.value}"

        if label.kind is EdgeKind.INSTANCE:
            context = TranslationContext(self.program, self.oracle, [before])
            args = context.state(before)
            return Rule(Apply(lhs_symbol, args), Apply(rhs_symbol, args), label=text)
        if label.kind is EdgeKind.REFINE:
            context = TranslationContext(self.program, self.oracle, [after])
            args = context.state(after)
            return Rule(Apply(lhs_symbol, args), Apply(rhs_symbol, args), label=f"{text} {label.refinement.value}")

        context = TranslationContext(self.program, self.oracle, [before, after])
        lhs = context.state(before)
        fresh_for = updated_fresh_for(self.program, self.oracle, before) & set(after.heap)
        rhs = context.state(after, frozenset(fresh_for))
        constraint = context.constraint(label.constraint) if label.constraint is not None else Truth(True)
        return Rule(Apply(lhs_symbol, lhs), Apply(rhs_symbol, rhs), constraint, label=f"{text} {label.instruction}")

    def emit(self, graph: ComputationGraph) -> Ctrs:
        system = Ctrs()
        for node in graph.nodes():
            arity = sum(1 for _ in graph.state(node).roots())
            system.declare(node_symbol(node), arity, SymbolKind.DEFINED)
            system.comments[node_symbol(node)] = node_title(graph, node)
        for name in self.program.classes:
            system.declare(name, len(self.program.field_table_domain(name)), SymbolKind.CONSTRUCTOR)
        for source, target, label in graph.edges():
            system.rules.append(self.rule(graph, source, target, label))
        LOGGER.info("Emitted %d rule(s) over %d defined symbol(s)", len(system.rules), len(graph))
        return system


def corr_rule(program: Program, graph: ComputationGraph, source: int, target: int, label: EdgeLabel) -> Rule:
    return RuleEmitter(program).rule(graph, source, target, label)


def emit_ctrs(program: Program, graph: ComputationGraph) -> Ctrs:
    return RuleEmitter(program).emit(graph)
