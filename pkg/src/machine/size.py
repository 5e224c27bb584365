"""The per-reference state size measure."""

from __future__ import annotations

from .graph import StateGraph, state_graph
from .state import JvmState
from .values import IntValue

__all__ = ["graph_size", "label_size", "state_size"]


def label_size(label: object) -> int:
    """``|z|`` for an integer, 1 for every other label."""

    if isinstance(label, IntValue):
        return abs(label.value)
    return 1


def graph_size(graph: StateGraph) -> int:
    """Sum, per stack/register root, of the label sizes it reaches, plus 1.

    Each root counts the set of nodes it reaches, so a node shared between
    two roots is counted once for each of them while a node reached twice
    from the same root is counted once.
    """

    total = 1
    for root in graph.roots:
        total += sum(label_size(graph.label(node)) for node in graph.reachable(root))
    return total


def state_size(state: JvmState) -> int:
    return graph_size(state_graph(state))
