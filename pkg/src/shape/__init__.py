"""Heap-shape properties: aliasing, reachability and cyclicity."""

from .assumptions import (
    AssumptionError,
    AssumptionViolation,
    Assumptions,
    check_assumptions,
    parse_assumptions,
    validate_roots,
)
from .oracle import ShapeOracle, heap_graph, may_alias, may_reach, maybe_cyclic
from .typereach import TypeReachability

__all__ = [
    "AssumptionError",
    "AssumptionViolation",
    "Assumptions",
    "ShapeOracle",
    "TypeReachability",
    "check_assumptions",
    "heap_graph",
    "may_alias",
    "may_reach",
    "maybe_cyclic",
    "parse_assumptions",
    "validate_roots",
]
