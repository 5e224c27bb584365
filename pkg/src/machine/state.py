"""Heap objects, frames and JVM states.

The records are shared with the abstract domain: an abstract state stores
the same :class:`Frame` and :class:`ObjectRecord` shapes, only over a larger
set of values. All of them are treated as immutable; updates return copies.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterator, Mapping

from bytecode import Program

from .values import default_value

__all__ = ["FieldRef", "Frame", "JvmState", "Location", "ObjectRecord", "RootId"]

FieldRef = tuple[str, str]
Location = tuple[str, str, int]
RootId = tuple[str, int, int]


@dataclass(frozen=True, slots=True)
class ObjectRecord:
    """An instance: class name plus its field table in field-table order."""

    class_name: str
    fields: tuple[tuple[FieldRef, object], ...] = ()

    @classmethod
    def default(cls, program: Program, class_name: str) -> "ObjectRecord":
        return cls(
            class_name,
            tuple((slot.ref, default_value(slot.type)) for slot in program.field_table_domain(class_name)),
        )

    def field(self, ref: FieldRef) -> object:
        for key, value in self.fields:
            if key == ref:
                return value
        raise KeyError(f"{self.class_name} has no field {ref[0]}.{ref[1]}")

    def with_field(self, ref: FieldRef, value: object) -> "ObjectRecord":
        if all(key != ref for key, _ in self.fields):
            raise KeyError(f"{self.class_name} has no field {ref[0]}.{ref[1]}")
        return ObjectRecord(
            self.class_name,
            tuple((key, value if key == ref else old) for key, old in self.fields),
        )

    def values(self) -> tuple[object, ...]:
        return tuple(value for _, value in self.fields)

    def map_values(self, fn: Callable[[object], object]) -> "ObjectRecord":
        return ObjectRecord(self.class_name, tuple((key, fn(value)) for key, value in self.fields))

    def __str__(self) -> str:
        inner = ", ".join(f"{name}={value}" for (_, name), value in self.fields)
        return f"{self.class_name}({inner})"


@dataclass(frozen=True, slots=True)
class Frame:
    """Method environment; ``stack`` runs from bottom to top."""

    stack: tuple[object, ...]
    registers: tuple[object, ...]
    class_name: str
    method_name: str
    pc: int = 0

    @property
    def location(self) -> Location:
        return (self.class_name, self.method_name, self.pc)

    def push(self, *values: object) -> "Frame":
        return replace(self, stack=self.stack + values)

    def pop(self, count: int = 1) -> tuple[tuple[object, ...], "Frame"]:
        """Remove ``count`` entries; the popped values are returned top first."""

        if count > len(self.stack):
            raise IndexError(
                f"{self.class_name}.{self.method_name} pc {self.pc}: "
                f"cannot pop {count} from a stack of {len(self.stack)}"
            )
        if count == 0:
            return (), self
        popped = tuple(reversed(self.stack[-count:]))
        return popped, replace(self, stack=self.stack[:-count])

    def peek(self, depth: int = 0) -> object:
        return self.stack[-1 - depth]

    def store(self, index: int, value: object) -> "Frame":
        registers = list(self.registers)
        registers[index] = value
        return replace(self, registers=tuple(registers))

    def jump(self, offset: int = 1) -> "Frame":
        return replace(self, pc=self.pc + offset)

    def map_values(self, fn: Callable[[object], object]) -> "Frame":
        return replace(
            self,
            stack=tuple(fn(value) for value in self.stack),
            registers=tuple(fn(value) for value in self.registers),
        )


@dataclass(frozen=True, slots=True)
class JvmState:
    """A heap plus the frame list; ``frames[-1]`` is the running frame."""

    heap: Mapping[int, object]
    frames: tuple[Frame, ...]

    @property
    def current(self) -> Frame:
        return self.frames[-1]

    @property
    def locations(self) -> tuple[Location, ...]:
        return tuple(frame.location for frame in self.frames)

    def with_current(self, frame: Frame, heap: Mapping[int, object] | None = None) -> "JvmState":
        return JvmState(self.heap if heap is None else heap, self.frames[:-1] + (frame,))

    def fresh_ref(self) -> int:
        return max(self.heap, default=0) + 1

    def roots(self) -> Iterator[tuple[RootId, object]]:
        """Stack entries of every frame, then register entries of every frame."""

        for index, frame in enumerate(self.frames):
            for position, value in enumerate(frame.stack):
                yield ("stack", index, position), value
        for index, frame in enumerate(self.frames):
            for position, value in enumerate(frame.registers):
                yield ("register", index, position), value

    def root_values(self) -> tuple[object, ...]:
        return tuple(value for _, value in self.roots())

    def addresses(self) -> list[int]:
        return sorted(self.heap)

