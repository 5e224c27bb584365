"""State graphs: the rooted, labelled graph view of a state."""

from __future__ import annotations

from typing import Hashable, Iterable, Iterator, Mapping

import networkx as nx

from .state import Frame, JvmState, ObjectRecord
from .values import Address

__all__ = ["StateGraph", "address_node", "state_graph"]


def address_node(ref: int) -> tuple[str, int]:
    return ("addr", ref)


class StateGraph:
    """Graph over stack/register indices, heap addresses and value occurrences.

    Every non-address value occurrence gets its own implicit node, so two
    fields holding ``null`` are two nodes. Field edges carry the
    ``(class, field)`` reference and their position in field-table order.
    Only nodes reachable from a root are present.
    """

    def __init__(self, heap: Mapping[int, object], frames: Iterable[Frame]) -> None:
        self.graph = nx.MultiDiGraph()
        roots: list[Hashable] = []
        pending: list[int] = []
        state = JvmState(heap, tuple(frames))
        for root, value in state.roots():
            self.graph.add_node(root, label=root, kind="root")
            roots.append(root)
            self._link(root, ("value", root), value, None, 0, pending)
        seen: set[int] = set()
        while pending:
            ref = pending.pop()
            if ref in seen:
                continue
            seen.add(ref)
            content = heap[ref]
            node = address_node(ref)
            if isinstance(content, ObjectRecord):
                self.graph.nodes[node]["label"] = content.class_name
                for order, (field_ref, value) in enumerate(content.fields):
                    self._link(node, ("value", ref, field_ref), value, field_ref, order, pending)
            else:
                self.graph.nodes[node]["label"] = content
        self.roots: tuple[Hashable, ...] = tuple(roots)

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def label(self, node: Hashable) -> object:
        return self.graph.nodes[node]["label"]

    def kind(self, node: Hashable) -> str:
        return self.graph.nodes[node]["kind"]

    def successors(self, node: Hashable) -> list[Hashable]:
        """Successors in field-table order, repeated when two fields share a target."""

        return [target for _, target in self.fields(node)]

    def fields(self, node: Hashable) -> list[tuple[object, Hashable]]:
        edges = sorted(self.graph.out_edges(node, data=True), key=lambda edge: edge[2]["order"])
        return [(data["field"], target) for _, target, data in edges]

    def reachable(self, node: Hashable) -> set[Hashable]:
        """Nodes reachable from ``node`` by a non-empty path."""

        found = nx.descendants(self.graph, node)
        if self.on_cycle(node):
            found.add(node)
        return found

    def on_cycle(self, node: Hashable) -> bool:
        return any(nx.has_path(self.graph, target, node) for target in self.graph.successors(node))

    def has_cycle_from(self, node: Hashable) -> bool:
        region = self.graph.subgraph({node} | nx.descendants(self.graph, node))
        return not nx.is_directed_acyclic_graph(region)

    def address_nodes(self) -> Iterator[Hashable]:
        return (node for node, kind in self.graph.nodes(data="kind") if kind == "address")

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _link(
        self,
        source: Hashable,
        implicit: Hashable,
        value: object,
        field_ref: object,
        order: int,
        pending: list[int],
    ) -> None:
        if isinstance(value, Address):
            target = address_node(value.ref)
            if target not in self.graph:
                self.graph.add_node(target, label=None, kind="address")
                pending.append(value.ref)
        else:
            target = implicit
            self.graph.add_node(target, label=value, kind="value")
        self.graph.add_edge(source, target, field=field_ref, order=order)


def state_graph(state: JvmState) -> StateGraph:
    return StateGraph(state.heap, state.frames)
