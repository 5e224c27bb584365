"""Size of abstract states, the measure that bounds ascending chains."""

from __future__ import annotations

from machine import graph_size

from .state import AbstractState

__all__ = ["abs_size"]


def abs_size(state: AbstractState) -> int:
    """Per-reference size with every abstract variable weighted 1."""

    if not state.is_proper:
        raise ValueError(f"abs_size is undefined for {state.kind.value}")
    return graph_size(state.graph())
