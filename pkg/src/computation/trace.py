"""Following concrete runs through a computation graph."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from abstraction import StateLattice, beta
from bytecode import Program
from machine import JvmState
from symbolic import EdgeKind

from .graph import ComputationGraph

__all__ = ["TraceReport", "WitnessNotFoundError", "max_step_length", "trace_concrete"]

LOGGER = logging.getLogger(__name__)


class WitnessNotFoundError(RuntimeError):
    """No graph path accounts for a concrete step."""


@dataclass(slots=True)
class TraceReport:
    """One witness path per concrete step.

    ``paths[i]`` lists the nodes visited for step ``i``, starting at the
    witness of the state before the step. ``bound`` is the longest path of
    the shape the walk uses anywhere in the graph.
    """

    paths: list[list[int]] = field(default_factory=list)
    bound: int = 0

    @property
    def lengths(self) -> list[int]:
        return [len(path) - 1 for path in self.paths]

    @property
    def max_length(self) -> int:
        return max(self.lengths, default=0)

    @property
    def witnesses(self) -> list[int]:
        return [path[-1] for path in self.paths]

    def as_dict(self) -> dict[str, object]:
        return {"steps": len(self.paths), "max_length": self.max_length, "bound": self.bound}


# phases of the walk: instance edges, then refinements, then one evaluation
_ALLOWED = {
    0: (EdgeKind.INSTANCE, EdgeKind.REFINE, EdgeKind.EVAL),
    1: (EdgeKind.REFINE, EdgeKind.EVAL),
}


def _phase_after(kind: EdgeKind) -> int:
    return 0 if kind is EdgeKind.INSTANCE else 1


def trace_concrete(graph: ComputationGraph, program: Program, run: Sequence[JvmState]) -> TraceReport:
    """Match every step of ``run`` with a graph path of instance, refinement and evaluation edges.

    Raises
    ------
    WitnessNotFoundError
        The first state is not represented by the entry node, or some step
        has no matching path.
    """

    lattice = StateLattice(program)
    report = TraceReport(bound=max_step_length(graph))
    if not run:
        return report
    if graph.entry is None or not lattice.gamma_member(run[0], graph.state(graph.entry)):
        raise WitnessNotFoundError("the initial state is not an instance of the entry node")

    current = graph.entry
    for index, concrete in enumerate(run[1:], start=1):
        target = beta(concrete)
        path = _witness_path(graph, lattice, current, target)
        if path is None:
            location = concrete.current.location if concrete.frames else ()
            raise WitnessNotFoundError(
                f"step {index} to {location} has no witness path from node {current}"
            )
        report.paths.append(path)
        current = path[-1]
    LOGGER.info("Traced %d step(s); longest witness path %d", len(report.paths), report.max_length)
    return report


def _witness_path(graph: ComputationGraph, lattice: StateLattice, start: int, target) -> list[int] | None:
    queue = deque([(start, 0, (start,))])
    seen = {(start, 0)}
    while queue:
        node, phase, path = queue.popleft()
        for successor, label in graph.out_edges(node):
            if label.kind not in _ALLOWED[phase]:
                continue
            if label.kind is EdgeKind.EVAL:
                accepted = lattice.instance_of(target, graph.state(successor), respect_assumptions=False)
                if accepted is not None:
                    return list(path) + [successor]
                continue
            key = (successor, _phase_after(label.kind))
            if key not in seen:
                seen.add(key)
                queue.append((successor, key[1], path + (successor,)))
    return None


def max_step_length(graph: ComputationGraph) -> int:
    """Longest path of instance edges, then refinements, then one evaluation."""

    @lru_cache(maxsize=None)
    def longest(node: int, phase: int) -> int:
        best = 0
        for successor, label in graph.out_edges(node):
            if label.kind not in _ALLOWED[phase]:
                continue
            if label.kind is EdgeKind.EVAL:
                best = max(best, 1)
            else:
                rest = longest(successor, _phase_after(label.kind))
                if rest:
                    best = max(best, rest + 1)
        return best

    return max((longest(node, 0) for node in graph.nodes()), default=0)
