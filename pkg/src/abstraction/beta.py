"""Injection of concrete states into the abstract domain."""

from __future__ import annotations

from machine import JvmState

from .state import AbstractState, collect_garbage, pairs

__all__ = ["beta"]


def beta(state: JvmState) -> AbstractState:
    """The abstract state describing exactly ``state``.

    Unreachable heap objects are dropped and every pair of the remaining
    addresses is annotated as unshared.
    """

    lifted = collect_garbage(AbstractState(heap=dict(state.heap), frames=state.frames))
    annotations = frozenset(frozenset(pair) for pair in pairs(lifted.heap))
    return AbstractState(heap=lifted.heap, frames=lifted.frames, annotations=annotations)
