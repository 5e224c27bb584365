"""Symbolic execution: evaluation steps, refinements and their side conditions."""

from .constraints import (
    Arith,
    Compare,
    Conj,
    Constraint,
    Disj,
    Neg,
    Truth,
    evaluate,
    iff,
    leaves,
    map_leaves,
    render_constraint,
)
from .executor import (
    EdgeKind,
    EdgeLabel,
    Failed,
    RefinementKind,
    RefinementRequest,
    Successors,
    SymbolicExecutor,
    SymResult,
    Terminal,
)

__all__ = [
    "Arith",
    "Compare",
    "Conj",
    "Constraint",
    "Disj",
    "EdgeKind",
    "EdgeLabel",
    "Failed",
    "Neg",
    "RefinementKind",
    "RefinementRequest",
    "Successors",
    "SymResult",
    "SymbolicExecutor",
    "Terminal",
    "Truth",
    "evaluate",
    "iff",
    "leaves",
    "map_leaves",
    "render_constraint",
]
