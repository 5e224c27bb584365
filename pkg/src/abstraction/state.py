"""Abstract states: heap and frames over abstract values, plus annotations.

Besides the unsharing annotations an abstract state carries two pieces of
bookkeeping for the heap-property queries:

``regions``
    Maps an address to the names of the entry roots (``this``, parameter
    names) whose initially reachable data it may belong to.
``assumptions``
    The acyclicity and unsharing facts declared for those regions that
    still hold at this point of the analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping

from machine import Address, Frame, JvmState, Location, ObjectRecord, RootId, StateGraph

from .values import BoolVar, ClassVar, IntVar

__all__ = [
    "AbstractState",
    "Assumptions",
    "StateKind",
    "annotation",
    "collect_garbage",
    "pairs",
]


class StateKind(str, Enum):
    PROPER = "proper"
    TOP = "top"
    BOTTOM = "bottom"


def annotation(p: int, q: int) -> frozenset[int]:
    if p == q:
        raise ValueError(f"annotation needs two distinct addresses, got o{p} twice")
    return frozenset((p, q))


def pairs(refs: Iterable[int]) -> Iterator[tuple[int, int]]:
    """All unordered pairs of distinct addresses, ascending."""

    return combinations(sorted(set(refs)), 2)


@dataclass(frozen=True, slots=True)
class Assumptions:
    """Declared shape facts about entry regions.

    ``unshared`` pairs are disjointness facts about the entry objects of two
    regions and hold for the whole run. A region listed in ``opened`` had
    one of its objects linked to data outside it, so its objects may now
    reach foreign data. ``acyclic`` regions contain no object that lies on
    a cycle.
    """

    acyclic: frozenset[str] = frozenset()
    unshared: frozenset[frozenset[str]] = frozenset()
    opened: frozenset[str] = frozenset()

    def __bool__(self) -> bool:
        return bool(self.acyclic or self.unshared)

    def __le__(self, other: "Assumptions") -> bool:
        return (
            self.acyclic <= other.acyclic
            and self.unshared <= other.unshared
            and self.opened >= other.opened
        )

    def meet(self, other: "Assumptions") -> "Assumptions":
        return Assumptions(
            self.acyclic & other.acyclic,
            self.unshared & other.unshared,
            self.opened | other.opened,
        )

    def separated(self, left: Iterable[str], right: Iterable[str]) -> bool:
        """Some region of ``left`` is declared unshared with one of ``right``."""

        right = tuple(right)
        return any(frozenset((a, b)) in self.unshared for a in left for b in right if a != b)

    def reach_separated(self, source: Iterable[str], target: Iterable[str]) -> bool:
        """Data of a ``source`` object cannot contain a ``target`` object."""

        return self.separated(self.closed(source), target)

    def closed(self, tags: Iterable[str]) -> frozenset[str]:
        """The regions of ``tags`` whose objects still only reach their own region."""

        return frozenset(tag for tag in tags if tag not in self.opened)

    def covers_acyclic(self, tags: Iterable[str]) -> bool:
        return any(tag in self.acyclic for tag in tags)

    def linked(
        self,
        source: frozenset[str],
        target: frozenset[str] | None,
        cycle: frozenset[str] | None = None,
    ) -> "Assumptions":
        """Facts after a ``source`` object's field is pointed at a ``target`` object.

        ``target`` is ``None`` for non-reference values. ``cycle`` names the
        regions of the objects a new cycle may pass through.
        """

        opened = self.opened
        if target is not None:
            opened = opened | (source - target)
        acyclic = self.acyclic - cycle if cycle else self.acyclic
        return Assumptions(acyclic, self.unshared, opened)

    def __str__(self) -> str:
        parts = [f"acyclic:{tag}" for tag in sorted(self.acyclic)]
        parts += [f"unshared:{','.join(sorted(pair))}" for pair in sorted(self.unshared, key=sorted)]
        parts += [f"opened:{tag}" for tag in sorted(self.opened)]
        return " ".join(parts)


@dataclass(frozen=True, slots=True)
class AbstractState:
    heap: Mapping[int, object] = field(default_factory=dict)
    frames: tuple[Frame, ...] = ()
    annotations: frozenset[frozenset[int]] = frozenset()
    regions: Mapping[int, frozenset[str]] = field(default_factory=dict)
    assumptions: Assumptions = Assumptions()
    next_id: int = 1
    kind: StateKind = StateKind.PROPER

    @classmethod
    def top(cls) -> "AbstractState":
        return cls(kind=StateKind.TOP)

    @classmethod
    def bottom(cls) -> "AbstractState":
        return cls(kind=StateKind.BOTTOM)

    @property
    def is_top(self) -> bool:
        return self.kind is StateKind.TOP

    @property
    def is_bottom(self) -> bool:
        return self.kind is StateKind.BOTTOM

    @property
    def is_proper(self) -> bool:
        return self.kind is StateKind.PROPER

    @property
    def current(self) -> Frame:
        return self.frames[-1]

    @property
    def locations(self) -> tuple[Location, ...]:
        return tuple(frame.location for frame in self.frames)

    def roots(self) -> Iterator[tuple[RootId, object]]:
        return JvmState(self.heap, self.frames).roots()

    def graph(self) -> StateGraph:
        return StateGraph(self.heap, self.frames)

    def content(self, ref: int) -> object:
        try:
            return self.heap[ref]
        except KeyError:
            raise KeyError(f"unknown address o{ref}") from None

    def class_of(self, ref: int) -> str:
        return self.content(ref).class_name

    def tags(self, ref: int) -> frozenset[str]:
        return self.regions.get(ref, frozenset())

    def annotated(self, p: int, q: int) -> bool:
        return p != q and frozenset((p, q)) in self.annotations

    def separated(self, p: int, q: int) -> bool:
        return p != q and self.assumptions.separated(self.tags(p), self.tags(q))

    def reach_separated(self, p: int, q: int) -> bool:
        return p != q and self.assumptions.reach_separated(self.tags(p), self.tags(q))

    def variables(self) -> set[IntVar | BoolVar]:
        found: set[IntVar | BoolVar] = set()
        for _, value in self.roots():
            if isinstance(value, (IntVar, BoolVar)):
                found.add(value)
        for content in self.heap.values():
            if isinstance(content, ObjectRecord):
                found.update(v for v in content.values() if isinstance(v, (IntVar, BoolVar)))
        return found

    def map_values(self, fn: Callable[[object], object]) -> "AbstractState":
        """Apply ``fn`` to every stack, register and field value."""

        heap = {
            ref: content.map_values(fn) if isinstance(content, ObjectRecord) else content
            for ref, content in self.heap.items()
        }
        return replace(self, heap=heap, frames=tuple(frame.map_values(fn) for frame in self.frames))

    def with_frames(self, *frames: Frame) -> "AbstractState":
        return replace(self, frames=self.frames[:-1] + frames)

    def fresh_ref(self) -> int:
        return max(self.heap, default=0) + 1

    def is_class_var(self, value: object) -> bool:
        return isinstance(value, Address) and isinstance(self.heap.get(value.ref), ClassVar)


def _reachable_refs(state: AbstractState) -> set[int]:
    seen: set[int] = set()
    pending = [value.ref for _, value in state.roots() if isinstance(value, Address)]
    while pending:
        ref = pending.pop()
        if ref in seen:
            continue
        seen.add(ref)
        content = state.heap[ref]
        if isinstance(content, ObjectRecord):
            pending.extend(v.ref for v in content.values() if isinstance(v, Address))
    return seen


def collect_garbage(state: AbstractState) -> AbstractState:
    """Drop addresses no root reaches, with their annotations and tags."""

    if not state.is_proper:
        return state
    live = _reachable_refs(state)
    if len(live) == len(state.heap):
        return state
    return replace(
        state,
        heap={ref: content for ref, content in state.heap.items() if ref in live},
        annotations=frozenset(pair for pair in state.annotations if pair <= live),
        regions={ref: tags for ref, tags in state.regions.items() if ref in live and tags},
    )
