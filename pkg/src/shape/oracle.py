"""May-alias, may-reach and maybe-cyclic queries on abstract states.

Every answer over-approximates: ``True`` means the property may hold in
some represented concrete state. Class variables stand for unknown data, so
whatever their runtime class can reach according to the type graph is
assumed reachable, unless a declared assumption rules it out.
"""

from __future__ import annotations

import logging

import networkx as nx

from abstraction import AbstractState, ClassVar, can_alias
from bytecode import Program
from machine import Address, JvmState, ObjectRecord

from .typereach import TypeReachability

__all__ = ["ShapeOracle", "heap_graph", "may_alias", "may_reach", "maybe_cyclic"]

LOGGER = logging.getLogger(__name__)


def heap_graph(state: AbstractState | JvmState) -> nx.DiGraph:
    """Address-level points-to graph of a concrete or abstract state."""

    graph = nx.DiGraph()
    for ref, content in state.heap.items():
        graph.add_node(ref)
        if isinstance(content, ObjectRecord):
            for value in content.values():
                if isinstance(value, Address):
                    graph.add_edge(ref, value.ref)
    return graph


class ShapeOracle:
    """Heap-property queries for the states of one program."""

    def __init__(self, program: Program) -> None:
        self.program = program
        self.types = TypeReachability(program)

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def may_alias(self, state: AbstractState, a: int, b: int) -> bool:
        state.content(a)
        state.content(b)
        if a == b:
            return True
        if state.annotated(a, b) or state.separated(a, b):
            return False
        return can_alias(self.program, state, a, b)

    def may_reach(self, state: AbstractState, a: int, b: int) -> bool:
        """Whether the object at ``a`` may reach the one at ``b`` (reflexively)."""

        target = state.content(b)
        state.content(a)
        if a == b:
            return True
        region = self.region(state, a)
        if b in region:
            return True
        if isinstance(target, ClassVar):
            targets = self.program.subclasses(target.class_name)
        else:
            targets = (target.class_name,)
        for ref in sorted(region):
            content = state.heap[ref]
            if not isinstance(content, ClassVar) or state.reach_separated(ref, b):
                continue
            if self.types.reaches_any(content.class_name, targets):
                LOGGER.debug("o%d may reach o%d through %s at o%d", a, b, content, ref)
                return True
        return False

    def maybe_cyclic(self, state: AbstractState, a: int) -> bool:
        """Whether the object at ``a`` may lie on a cycle."""

        content = state.content(a)
        graph = heap_graph(state)
        if any(nx.has_path(graph, successor, a) for successor in graph.successors(a)):
            return True
        descendants = nx.descendants(graph, a)
        if state.assumptions.covers_acyclic(state.tags(a)):
            return False
        if isinstance(content, ClassVar):
            if any(self.types.on_cycle(sub) for sub in self.program.subclasses(content.class_name)):
                return True
        for ref in sorted(descendants):
            summary = state.heap[ref]
            if not isinstance(summary, ClassVar):
                continue
            # reaching back to a would put ref on the cycle too
            if state.assumptions.covers_acyclic(state.tags(ref)):
                continue
            if self.may_reach(state, ref, a):
                return True
        return False

    def region(self, state: AbstractState, a: int, graph: nx.DiGraph | None = None) -> set[int]:
        """``a`` and every address reachable from it."""

        graph = heap_graph(state) if graph is None else graph
        return {a} | nx.descendants(graph, a)


def may_alias(program: Program, state: AbstractState, a: int, b: int) -> bool:
    return ShapeOracle(program).may_alias(state, a, b)


def may_reach(program: Program, state: AbstractState, a: int, b: int) -> bool:
    return ShapeOracle(program).may_reach(state, a, b)


def maybe_cyclic(program: Program, state: AbstractState, a: int) -> bool:
    return ShapeOracle(program).maybe_cyclic(state, a)
