"""Replaying a concrete run as rewrite steps of the generated system."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from abstraction import beta
from bytecode import Program
from computation import ComputationGraph, TraceReport, trace_concrete
from ctrs import Apply, Ctrs, TranslationContext, node_symbol
from machine import JvmState
from shape import ShapeOracle

from .matching import RuleIndex

__all__ = ["SimulationError", "SimulationReport", "SimulationStep", "simulate_run"]

LOGGER = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """A concrete step could not be replayed by the rewrite system."""


@dataclass(frozen=True, slots=True)
class SimulationStep:
    index: int
    location: str
    nodes: tuple[int, ...]
    rules: tuple[int, ...]

    @property
    def rewrites(self) -> int:
        return len(self.rules)


@dataclass(slots=True)
class SimulationReport:
    """Per-step rewrite counts plus the totals ``m`` (steps), ``L`` (rewrites) and ``K`` (bound)."""

    steps: list[SimulationStep] = field(default_factory=list)
    bound: int = 0

    @property
    def m(self) -> int:
        return len(self.steps)

    @property
    def total(self) -> int:
        return sum(step.rewrites for step in self.steps)

    @property
    def within_bounds(self) -> bool:
        return self.m <= self.total <= self.bound * self.m

    def render(self) -> str:
        lines = [f"{'step':>5}  {'rewrites':>8}  {'location':<28}  path"]
        for step in self.steps:
            path = " -> ".join(f"n{node}" for node in step.nodes)
            lines.append(f"{step.index:>5}  {step.rewrites:>8}  {step.location:<28}  {path}")
        lines.append(f"m={self.m} L={self.total} K={self.bound}")
        lines.append(f"m <= L <= K*m: {'yes' if self.within_bounds else 'no'}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict[str, object]:
        return {
            "m": self.m,
            "L": self.total,
            "K": self.bound,
            "steps": [{"index": step.index, "nodes": list(step.nodes), "rules": list(step.rules)} for step in self.steps],
        }


def simulate_run(
    program: Program,
    graph: ComputationGraph,
    system: Ctrs,
    run: Sequence[JvmState],
    trace: TraceReport | None = None,
) -> SimulationReport:
    """Check that every step of ``run`` is matched by at least one rewrite step.

    The witness path of a step ``x -> y`` is replayed edge by edge: instance
    and refinement edges must rewrite ``f_s(tst(beta(x)))`` to
    ``f_t(tst(beta(x)))`` and the final evaluation edge must rewrite it to
    ``f_t(tst(beta(y)))``.

    Raises
    ------
    SimulationError
        Some edge of a witness path has no rule that performs the step, or
        the totals fall outside ``m <= L <= K*m``.
    """

    trace = trace or trace_concrete(graph, program, run)
    oracle = ShapeOracle(program)
    index = RuleIndex(system)
    report = SimulationReport(bound=trace.bound)

    for step, path in enumerate(trace.paths, start=1):
        before, after = run[step - 1], run[step]
        before_args = _arguments(program, oracle, before)
        after_args = _arguments(program, oracle, after)
        rules: list[int] = []
        for position, (source, target) in enumerate(zip(path, path[1:])):
            final = position == len(path) - 2
            lhs = Apply(node_symbol(source), before_args)
            rhs = Apply(node_symbol(target), after_args if final else before_args)
            rule = index.verify_step(lhs, rhs)
            if rule is None:
                raise SimulationError(f"step {step}: no rule rewrites {lhs} to {rhs} along n{source} -> n{target}")
            rules.append(rule)
        report.steps.append(SimulationStep(step, _location(before), tuple(path), tuple(rules)))

    if not report.within_bounds:
        raise SimulationError(f"rewrite count L={report.total} is outside [m, K*m] for m={report.m}, K={report.bound}")
    LOGGER.info("Simulated %d step(s) with %d rewrite(s), bound %d", report.m, report.total, report.bound)
    return report


def _arguments(program: Program, oracle: ShapeOracle, state: JvmState):
    abstract = beta(state)
    return TranslationContext(program, oracle, [abstract]).state(abstract)


def _location(state: JvmState) -> str:
    return " / ".join(f"{cls}.{method} {pc:02d}" for cls, method, pc in state.locations)
