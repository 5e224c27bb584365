"""Construction of computation graphs with widening at loop heads."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from abstraction import AbstractState, Assumptions, BoolVar, ClassVar, IntVar, StateLattice, reduce
from bytecode import Program, TypeKind
from machine import NULL, UNIT, Address, Frame
from shape import ShapeOracle, validate_roots
from symbolic import EdgeKind, EdgeLabel, Failed, SymbolicExecutor, Terminal

from .graph import ComputationGraph, NodeOrigin, Outcome

__all__ = [
    "AnalysisLimitError",
    "GraphBuilder",
    "GraphLimits",
    "build_graph",
    "initial_abstract_state",
]

LOGGER = logging.getLogger(__name__)


class AnalysisLimitError(RuntimeError):
    """The graph outgrew its limits, or widening collapsed to Top."""


@dataclass(frozen=True, slots=True)
class GraphLimits:
    max_nodes: int = 10_000
    max_depth: int = 100_000
    max_expansions: int = 200_000

    def __post_init__(self) -> None:
        for name in ("max_nodes", "max_depth", "max_expansions"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


def initial_abstract_state(
    program: Program,
    entry_class: str,
    method_name: str,
    assumptions: Assumptions = Assumptions(),
    this_nonnull: bool = False,
) -> AbstractState:
    """The abstract state standing for every call of ``entry_class.method_name``.

    ``this`` and reference parameters become unknown objects of their static
    types, tagged with the root name; integer and Boolean parameters become
    variables. With ``this_nonnull`` the receiver is materialized one level
    deep as an instance of exactly ``entry_class``.
    """

    owner, method = program.resolve_method(entry_class, method_name)
    validate_roots(assumptions, ["this", *(param.name for param in method.params)])
    heap: dict[int, object] = {1: ClassVar(entry_class)}
    regions: dict[int, frozenset[str]] = {1: frozenset({"this"})}
    next_id = 1
    params: list[object] = []
    for param in method.params:
        kind = param.type.kind
        if kind is TypeKind.CLASS:
            ref = max(heap) + 1
            heap[ref] = ClassVar(param.type.class_name)
            regions[ref] = frozenset({param.name})
            params.append(Address(ref))
        elif kind is TypeKind.INT:
            params.append(IntVar(next_id))
            next_id += 1
        elif kind is TypeKind.BOOL:
            params.append(BoolVar(next_id))
            next_id += 1
        else:
            params.append(NULL if kind is TypeKind.NULL else UNIT)
    registers = (Address(1), *params, *([UNIT] * method.max_locals))
    state = AbstractState(
        heap=heap,
        frames=(Frame((), registers, owner, method.name, 0),),
        regions=regions,
        assumptions=assumptions,
        next_id=next_id,
    )
    if this_nonnull:
        state = SymbolicExecutor(program).refine_class_instance(state, 1)[0]
    return reduce(program, state)


class GraphBuilder:
    """Expands abstract states depth-first into a :class:`ComputationGraph`.

    A state produced by an evaluation step first tries to become an instance
    of an existing state at the same location vector. Failing that, if one
    of its tree ancestors sits at the same location, the loop is widened:
    the ancestor's subtree is discarded and the ancestor gets an instance
    edge to the join of both states, which is expanded instead. Widening an
    already widened state replaces it, so every widened node hangs directly
    off the node it generalizes.
    """

    def __init__(self, program: Program, limits: GraphLimits | None = None) -> None:
        self.program = program
        self.limits = limits or GraphLimits()
        self.lattice = StateLattice(program)
        self.executor = SymbolicExecutor(program, ShapeOracle(program))

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def build(self, initial: AbstractState) -> ComputationGraph:
        graph = ComputationGraph()
        pending = [graph.add_node(initial, NodeOrigin.ENTRY)]
        expansions = 0
        widenings = 0
        while pending:
            node = pending.pop()
            if node not in graph or graph.is_expanded(node):
                continue
            expansions += 1
            if expansions > self.limits.max_expansions:
                raise AnalysisLimitError(f"more than {self.limits.max_expansions} expansions")
            if graph.origin(node) is NodeOrigin.EVALUATION:
                if self._link_instance(graph, node):
                    continue
                head = self._loop_head(graph, node)
                if head is not None:
                    pending.extend(self._widen(graph, head, node))
                    widenings += 1
                    continue
            pending.extend(reversed(self._expand(graph, node)))
        LOGGER.info(
            "Computation graph: %d node(s), %d expansion(s), %d widening(s)",
            len(graph),
            expansions,
            widenings,
        )
        return graph

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _link_instance(self, graph: ComputationGraph, node: int) -> bool:
        state = graph.state(node)
        for other in graph.at_location(state.locations):
            if other == node or graph.has_instance_edge(other):
                continue
            if self.lattice.leq(state, graph.state(other)):
                LOGGER.debug("Node %d is an instance of node %d", node, other)
                graph.add_edge(node, other, EdgeLabel.instance())
                return True
        return False

    @staticmethod
    def _loop_head(graph: ComputationGraph, node: int) -> int | None:
        locations = graph.state(node).locations
        for ancestor in graph.ancestors(node):
            if graph.origin(ancestor) is NodeOrigin.REFINEMENT:
                continue
            if graph.state(ancestor).locations == locations:
                return ancestor
        return None

    def _widen(self, graph: ComputationGraph, head: int, node: int) -> list[int]:
        joined = self.lattice.reduce(self.lattice.join(graph.state(head), graph.state(node)))
        if not joined.is_proper:
            raise AnalysisLimitError(
                f"widening at {graph.state(head).current.location} collapsed to {joined.kind.value}"
            )
        base = head
        if graph.origin(head) is NodeOrigin.WIDENING:
            # replace the earlier generalization rather than chaining onto it
            base = graph.parent(head)
        discarded = graph.tree_descendants(base)
        dangling = {
            source
            for source, target, _ in graph.edges()
            if target in discarded and source not in discarded
        }
        dangling.discard(base)
        graph.remove_nodes(discarded)
        graph.clear_successors(base)
        for source in dangling:
            graph.clear_successors(source)
        widened = graph.add_node(joined, NodeOrigin.WIDENING, parent=base)
        graph.add_edge(base, widened, EdgeLabel.instance())
        LOGGER.debug(
            "Widened node %d with node %d into node %d below node %d; discarded %d node(s), requeued %s",
            head,
            node,
            widened,
            base,
            len(discarded),
            sorted(dangling),
        )
        return sorted(dangling) + [widened]

    def _expand(self, graph: ComputationGraph, node: int) -> list[int]:
        result = self.executor.successors(graph.state(node))
        if isinstance(result, Terminal):
            graph.set_outcome(node, Outcome(value=result.value))
            return []
        if isinstance(result, Failed):
            graph.set_outcome(node, Outcome(failure=result.reason))
            return []
        children = []
        for state, label in result.steps:
            origin = NodeOrigin.EVALUATION if label.kind is EdgeKind.EVAL else NodeOrigin.REFINEMENT
            child = graph.add_node(state, origin, parent=node)
            graph.add_edge(node, child, label)
            self._check_limits(graph, child)
            children.append(child)
        return children

    def _check_limits(self, graph: ComputationGraph, node: int) -> None:
        if len(graph) > self.limits.max_nodes:
            raise AnalysisLimitError(f"computation graph exceeds {self.limits.max_nodes} nodes")
        if graph.depth(node) > self.limits.max_depth:
            raise AnalysisLimitError(f"computation graph deeper than {self.limits.max_depth}")


def build_graph(program: Program, initial: AbstractState, limits: GraphLimits | None = None) -> ComputationGraph:
    return GraphBuilder(program, limits).build(initial)
