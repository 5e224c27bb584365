"""Which classes an instance of a class can reference through its fields."""

from __future__ import annotations

import logging

import networkx as nx

from bytecode import Program

__all__ = ["TypeReachability"]

LOGGER = logging.getLogger(__name__)


class TypeReachability:
    """Runtime-class graph: ``S -> R`` if some field of ``S`` can hold an ``R``.

    A field of static type ``F`` can hold an instance of any subclass of
    ``F``, so each class-typed field contributes one edge per subclass.
    """

    def __init__(self, program: Program) -> None:
        self.program = program
        self.graph = nx.DiGraph()
        for name in program.classes:
            self.graph.add_node(name)
            for slot in program.field_table_domain(name):
                if slot.type.is_class and program.has_class(slot.type.class_name):
                    for target in program.subclasses(slot.type.class_name):
                        self.graph.add_edge(name, target, field=slot.ref)
        self._closure = {name: nx.descendants(self.graph, name) for name in self.graph}
        self._cyclic = set()
        for component in nx.strongly_connected_components(self.graph):
            member = next(iter(component))
            if len(component) > 1 or self.graph.has_edge(member, member):
                self._cyclic.update(component)
        LOGGER.debug("Type graph: %d edges, cyclic classes %s", self.graph.number_of_edges(), sorted(self._cyclic))

    def reaches(self, source: str, target: str) -> bool:
        """An instance of exactly ``source`` can reach one of exactly ``target``."""

        return source == target or target in self._closure[source]

    def reaches_any(self, source: str, targets: set[str] | tuple[str, ...]) -> bool:
        """Some instance of ``source`` or a subclass reaches one of ``targets``."""

        return any(
            self.reaches(sub, target) for sub in self.program.subclasses(source) for target in targets
        )

    def on_cycle(self, name: str) -> bool:
        return name in self._cyclic

