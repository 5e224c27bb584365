"""Declared shape assumptions about entry arguments.

``acyclic:R`` states that the data reachable from root ``R`` contains no
cycle; ``unshared:R,S`` states that the data reachable from ``R`` and from
``S`` is disjoint. Roots are ``this`` and parameter names. The analysis
trusts these facts; :func:`check_assumptions` tests them on concrete inputs.
"""

from __future__ import annotations

import logging
from typing import Iterable, Mapping

import networkx as nx

from abstraction import Assumptions
from machine import Address, JvmState

from .oracle import heap_graph

__all__ = [
    "AssumptionError",
    "AssumptionViolation",
    "Assumptions",
    "check_assumptions",
    "parse_assumptions",
    "validate_roots",
]

LOGGER = logging.getLogger(__name__)


class AssumptionError(ValueError):
    """An assumption that does not follow the ``kind:roots`` syntax."""


class AssumptionViolation(ValueError):
    """A concrete input breaks a declared assumption."""


def parse_assumptions(texts: Iterable[str]) -> Assumptions:
    """Parse ``acyclic:R`` and ``unshared:R,S`` items into one record."""

    acyclic: set[str] = set()
    unshared: set[frozenset[str]] = set()
    for text in texts:
        kind, sep, body = text.partition(":")
        names = [name.strip() for name in body.split(",") if name.strip()]
        if not sep or not names:
            raise AssumptionError(f"invalid assumption {text!r}; expected acyclic:R or unshared:R,S")
        kind = kind.strip().lower()
        if kind == "acyclic":
            if len(names) != 1:
                raise AssumptionError(f"acyclic takes one root, got {text!r}")
            acyclic.add(names[0])
        elif kind == "unshared":
            if len(names) != 2 or names[0] == names[1]:
                raise AssumptionError(f"unshared takes two distinct roots, got {text!r}")
            unshared.add(frozenset(names))
        else:
            raise AssumptionError(f"unknown assumption kind {kind!r} in {text!r}")
    return Assumptions(frozenset(acyclic), frozenset(unshared))


def validate_roots(assumptions: Assumptions, roots: Iterable[str]) -> None:
    known = set(roots)
    mentioned = set(assumptions.acyclic).union(*assumptions.unshared)
    unknown = sorted(mentioned - known)
    if unknown:
        raise AssumptionError(
            f"assumption mentions unknown root(s) {', '.join(unknown)}; known: {', '.join(sorted(known))}"
        )


def _region(graph: nx.DiGraph, value: object) -> set[int]:
    if not isinstance(value, Address):
        return set()
    return {value.ref} | nx.descendants(graph, value.ref)


def check_assumptions(state: JvmState, roots: Mapping[str, object], assumptions: Assumptions) -> None:
    """Raise :class:`AssumptionViolation` if ``state`` breaks an assumption."""

    validate_roots(assumptions, roots)
    graph = heap_graph(state)
    for name in sorted(assumptions.acyclic):
        region = _region(graph, roots[name])
        if not nx.is_directed_acyclic_graph(graph.subgraph(region)):
            raise AssumptionViolation(f"{name} is assumed acyclic but its data contains a cycle")
    for pair in sorted(assumptions.unshared, key=sorted):
        left, right = sorted(pair)
        shared = _region(graph, roots[left]) & _region(graph, roots[right])
        if shared:
            listed = ", ".join(f"o{ref}" for ref in sorted(shared))
            raise AssumptionViolation(f"{left} and {right} are assumed unshared but both reach {listed}")
    LOGGER.debug("Input satisfies %s", assumptions)
