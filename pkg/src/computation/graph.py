"""Computation graphs: abstract states linked by evaluation, refinement and instance edges."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import networkx as nx

from abstraction import AbstractState
from machine import FailureReason, Location
from symbolic import EdgeKind, EdgeLabel

__all__ = ["ComputationGraph", "NodeOrigin", "Outcome"]


class NodeOrigin(str, Enum):
    ENTRY = "entry"
    EVALUATION = "evaluation"
    REFINEMENT = "refinement"
    WIDENING = "widening"


@dataclass(frozen=True, slots=True)
class Outcome:
    """How a leaf ends: a returned value or a failure reason."""

    value: object = None
    failure: FailureReason | None = None

    def __str__(self) -> str:
        if self.failure is not None:
            return f"failed {self.failure.value}"
        return f"returns {self.value}"


class ComputationGraph:
    """A finite graph of abstract states rooted at the entry node.

    Node ids are allocated from a counter and never reused, so ids stay
    stable when widening discards part of the graph. Every node but the
    entry remembers the node it was created from (its tree parent).
    """

    def __init__(self) -> None:
        self.graph = nx.MultiDiGraph()
        self.entry: int | None = None
        self._next_id = 0
        self._by_location: dict[tuple[Location, ...], list[int]] = {}

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------
    def add_node(self, state: AbstractState, origin: NodeOrigin, parent: int | None = None) -> int:
        node = self._next_id
        self._next_id += 1
        depth = 0 if parent is None else self.graph.nodes[parent]["depth"] + 1
        self.graph.add_node(node, state=state, origin=origin, parent=parent, depth=depth, outcome=None)
        self._by_location.setdefault(state.locations, []).append(node)
        if origin is NodeOrigin.ENTRY:
            self.entry = node
        return node

    def add_edge(self, source: int, target: int, label: EdgeLabel) -> None:
        self.graph.add_edge(source, target, label=label)

    def set_outcome(self, node: int, outcome: Outcome) -> None:
        self.graph.nodes[node]["outcome"] = outcome

    def clear_successors(self, node: int) -> None:
        for _, target, key in list(self.graph.out_edges(node, keys=True)):
            self.graph.remove_edge(node, target, key)
        self.graph.nodes[node]["outcome"] = None

    def remove_nodes(self, nodes: set[int]) -> None:
        for node in nodes:
            locations = self.state(node).locations
            self._by_location[locations].remove(node)
        self.graph.remove_nodes_from(nodes)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    def __contains__(self, node: object) -> bool:
        return node in self.graph

    def nodes(self) -> list[int]:
        return sorted(self.graph.nodes)

    def state(self, node: int) -> AbstractState:
        return self.graph.nodes[node]["state"]

    def origin(self, node: int) -> NodeOrigin:
        return self.graph.nodes[node]["origin"]

    def parent(self, node: int) -> int | None:
        return self.graph.nodes[node]["parent"]

    def depth(self, node: int) -> int:
        return self.graph.nodes[node]["depth"]

    def outcome(self, node: int) -> Outcome | None:
        return self.graph.nodes[node]["outcome"]

    def out_edges(self, node: int) -> list[tuple[int, EdgeLabel]]:
        """Outgoing edges in insertion order."""

        return [(target, data["label"]) for _, target, data in self.graph.out_edges(node, data=True)]

    def edges(self) -> Iterator[tuple[int, int, EdgeLabel]]:
        for source in self.nodes():
            for target, label in self.out_edges(source):
                yield source, target, label

    def edges_of_kind(self, kind: EdgeKind) -> list[tuple[int, int, EdgeLabel]]:
        return [edge for edge in self.edges() if edge[2].kind is kind]

    def is_expanded(self, node: int) -> bool:
        return self.graph.out_degree(node) > 0 or self.outcome(node) is not None

    def has_instance_edge(self, node: int) -> bool:
        return any(label.kind is EdgeKind.INSTANCE for _, label in self.out_edges(node))

    def at_location(self, locations: tuple[Location, ...]) -> list[int]:
        return sorted(self._by_location.get(locations, ()))

    def ancestors(self, node: int) -> Iterator[int]:
        """Tree ancestors, nearest first."""

        current = self.parent(node)
        while current is not None:
            yield current
            current = self.parent(current)

    def tree_descendants(self, node: int) -> set[int]:
        children: dict[int, list[int]] = {}
        for other, parent in self.graph.nodes(data="parent"):
            if parent is not None:
                children.setdefault(parent, []).append(other)
        found: set[int] = set()
        pending = list(children.get(node, ()))
        while pending:
            current = pending.pop()
            found.add(current)
            pending.extend(children.get(current, ()))
        return found

    def leaves(self) -> list[int]:
        return [node for node in self.nodes() if self.outcome(node) is not None]

    def as_dict(self) -> dict[str, object]:
        counts = {kind.value: len(self.edges_of_kind(kind)) for kind in EdgeKind}
        return {"nodes": len(self), "edges": self.graph.number_of_edges(), **counts, "leaves": len(self.leaves())}
