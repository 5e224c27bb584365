"""Symbolic evaluation and refinement of abstract states.

The executor follows an eager strategy: whenever the current instruction
cannot be evaluated on the state as it is (an unknown Boolean guards a
branch, an unknown object is dereferenced, two addresses may alias at a
field update or comparison), the state is refined first, and only refined
states are evaluated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Union

from abstraction import (
    AbstractState,
    Assumptions,
    BoolVar,
    ClassVar,
    IntVar,
    collect_garbage,
    reduce,
    unify,
    variable_for,
)
from bytecode import Instruction, MethodDecl, Opcode, Program, TypeKind
from bytecode.types import BINARY_OPCODES
from machine import (
    NULL,
    UNIT,
    Address,
    BoolValue,
    FailureReason,
    Frame,
    NullValue,
    ObjectRecord,
    apply_binary,
    default_value,
    from_literal,
)
from shape import ShapeOracle

from .constraints import Arith, Compare, Conj, Constraint, Disj, Neg, iff, render_constraint

__all__ = [
    "EdgeKind",
    "EdgeLabel",
    "Failed",
    "RefinementKind",
    "RefinementRequest",
    "Successors",
    "SymResult",
    "SymbolicExecutor",
    "Terminal",
]

LOGGER = logging.getLogger(__name__)


class EdgeKind(str, Enum):
    EVAL = "eval"
    REFINE = "refine"
    INSTANCE = "instance"


class RefinementKind(str, Enum):
    CLASS_INSTANCE = "classInstance"
    UNSHARE = "unshare"
    BOOLEAN = "boolean"


@dataclass(frozen=True, slots=True)
class EdgeLabel:
    """Label of a computation-graph edge; only evaluations carry constraints."""

    kind: EdgeKind
    constraint: Constraint | None = None
    instruction: str | None = None
    refinement: RefinementKind | None = None

    @classmethod
    def eval(cls, instruction: Instruction, constraint: Constraint | None = None) -> "EdgeLabel":
        return cls(EdgeKind.EVAL, constraint=constraint, instruction=str(instruction))

    @classmethod
    def refine(cls, kind: RefinementKind) -> "EdgeLabel":
        return cls(EdgeKind.REFINE, refinement=kind)

    @classmethod
    def instance(cls) -> "EdgeLabel":
        return cls(EdgeKind.INSTANCE)

    def __str__(self) -> str:
        if self.kind is EdgeKind.EVAL:
            return render_constraint(self.constraint) if self.constraint is not None else ""
        if self.kind is EdgeKind.REFINE:
            return f"ref:{self.refinement.value}"
        return "ins"

    def as_dict(self) -> dict[str, object]:
        data: dict[str, object] = {"kind": self.kind.value}
        if self.instruction is not None:
            data["instruction"] = self.instruction
        if self.constraint is not None:
            data["constraint"] = render_constraint(self.constraint)
        if self.refinement is not None:
            data["refinement"] = self.refinement.value
        return data


@dataclass(frozen=True, slots=True)
class RefinementRequest:
    """Which refinement the current instruction needs.

    ``address`` is the refined address (class instance, unsharing) and
    ``other`` the second address of an unsharing; ``depth`` is the stack
    depth of a Boolean variable, counted from the top.
    """

    kind: RefinementKind
    address: int | None = None
    other: int | None = None
    depth: int = 0


@dataclass(frozen=True, slots=True)
class Successors:
    steps: tuple[tuple[AbstractState, EdgeLabel], ...]


@dataclass(frozen=True, slots=True)
class Terminal:
    value: object


@dataclass(frozen=True, slots=True)
class Failed:
    reason: FailureReason


SymResult = Union[Successors, Terminal, Failed]


class SymbolicExecutor:
    """One-step symbolic semantics plus the refinements it relies on."""

    def __init__(self, program: Program, oracle: ShapeOracle | None = None) -> None:
        self.program = program
        self.oracle = oracle or ShapeOracle(program)
        self._methods: dict[tuple[str, str], MethodDecl] = {}

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def instruction_at(self, frame: Frame) -> Instruction:
        key = (frame.class_name, frame.method_name)
        method = self._methods.get(key)
        if method is None:
            method = self.program.class_decl(frame.class_name).find_method(frame.method_name)
            if method is None:
                raise LookupError(f"frame refers to unknown method {frame.class_name}.{frame.method_name}")
            self._methods[key] = method
        return method.body[frame.pc]

    def successors(self, state: AbstractState) -> SymResult:
        """Refinement successors if one is needed, otherwise one evaluation."""

        request = self.needs_refinement(state)
        if request is None:
            return self.symbolic_step(state)
        LOGGER.debug("Refining %s at %s", request, state.current.location)
        label = EdgeLabel.refine(request.kind)
        return Successors(tuple((refined, label) for refined in self.refine(state, request)))

    def needs_refinement(self, state: AbstractState) -> RefinementRequest | None:
        if not state.frames:
            raise ValueError("needs_refinement expects a state with at least one frame")
        frame = state.current
        instruction = self.instruction_at(frame)
        opcode = instruction.opcode

        if opcode is Opcode.IF_FALSE:
            if isinstance(frame.peek(), BoolVar):
                return RefinementRequest(RefinementKind.BOOLEAN)
            return None
        if opcode in (Opcode.GETFIELD, Opcode.CHECKCAST):
            return self._instance_request(state, frame.peek())
        if opcode is Opcode.INVOKE:
            return self._instance_request(state, frame.peek(instruction.index))
        if opcode is Opcode.PUTFIELD:
            target = frame.peek(1)
            request = self._instance_request(state, target)
            if request is not None or not isinstance(target, Address):
                return request
            for other in sorted(state.heap):
                if other == target.ref or state.annotated(target.ref, other):
                    continue
                if self.oracle.may_alias(state, target.ref, other):
                    return RefinementRequest(RefinementKind.UNSHARE, target.ref, other)
            return None
        if opcode in (Opcode.CMP_EQ, Opcode.CMP_NEQ):
            return self._comparison_request(state, frame.peek(1), frame.peek())
        return None

    def refine(self, state: AbstractState, request: RefinementRequest) -> list[AbstractState]:
        if request.kind is RefinementKind.CLASS_INSTANCE:
            return self.refine_class_instance(state, request.address)
        if request.kind is RefinementKind.UNSHARE:
            return self.refine_unshare(state, request.address, request.other)
        return self.refine_boolean(state, request.depth)

    def refine_class_instance(self, state: AbstractState, ref: int) -> list[AbstractState]:
        """One successor per subclass instance, then the ``null`` case."""

        content = state.content(ref)
        if not isinstance(content, ClassVar):
            raise ValueError(f"o{ref} holds {content}, not an unknown object")
        inherited = state.assumptions.closed(state.tags(ref))
        refined: list[AbstractState] = []
        for class_name in self.program.subclasses(content.class_name):
            heap = dict(state.heap)
            regions = dict(state.regions)
            next_id = state.next_id
            fields = []
            for slot in self.program.field_table_domain(class_name):
                if slot.type.kind in (TypeKind.INT, TypeKind.BOOL):
                    value = variable_for(slot.type, next_id)
                    next_id += 1
                elif slot.type.is_class:
                    fresh = max(heap) + 1
                    heap[fresh] = ClassVar(slot.type.class_name)
                    if inherited:
                        regions[fresh] = inherited
                    value = Address(fresh)
                else:
                    value = default_value(slot.type)
                fields.append((slot.ref, value))
            heap[ref] = ObjectRecord(class_name, tuple(fields))
            instance = replace(state, heap=heap, regions=regions, next_id=next_id)
            refined.append(reduce(self.program, instance))
        refined.append(self._substitute_null(state, ref))
        return refined

    def refine_unshare(self, state: AbstractState, a: int, b: int) -> list[AbstractState]:
        """The state with ``a`` and ``b`` distinct, then the one where they alias.

        The aliasing case is left out when the two cannot be unified.
        """

        state.content(a)
        state.content(b)
        if a == b:
            raise ValueError(f"unsharing needs two distinct addresses, got o{a} twice")
        if state.annotated(a, b):
            raise ValueError(f"o{a} and o{b} are already known to be distinct")
        distinct = replace(state, annotations=state.annotations | {frozenset((a, b))})
        merged = unify(self.program, state, a, b)
        if merged is None:
            return [distinct]
        return [distinct, reduce(self.program, merged)]

    def refine_boolean(self, state: AbstractState, depth: int = 0) -> list[AbstractState]:
        var = state.current.peek(depth)
        if not isinstance(var, BoolVar):
            raise ValueError(f"stack entry {depth} below the top is {var}, not a Boolean variable")
        return [
            state.map_values(lambda value, truth=truth: BoolValue(truth) if value == var else value)
            for truth in (True, False)
        ]

    def symbolic_step(self, state: AbstractState) -> SymResult:
        frame = state.current
        instruction = self.instruction_at(frame)
        opcode = instruction.opcode

        def advance(next_frame: Frame, constraint: Constraint | None = None, **changes) -> SymResult:
            stepped = replace(state, frames=state.frames[:-1] + (next_frame,), **changes)
            return Successors(((collect_garbage(stepped), EdgeLabel.eval(instruction, constraint)),))

        if opcode is Opcode.LOAD:
            return advance(frame.push(frame.registers[instruction.index]).jump())
        if opcode is Opcode.STORE:
            (value,), frame = frame.pop()
            return advance(frame.store(instruction.index, value).jump())
        if opcode is Opcode.PUSH:
            return advance(frame.push(from_literal(instruction.literal)).jump())
        if opcode is Opcode.POP:
            _, frame = frame.pop()
            return advance(frame.jump())
        if opcode is Opcode.GOTO:
            return advance(frame.jump(instruction.index))
        if opcode is Opcode.IF_FALSE:
            (value,), frame = frame.pop()
            if not isinstance(value, BoolValue):
                raise ValueError(f"IfFalse at {frame.location} on {value}; refine Booleans first")
            return advance(frame.jump(1 if value.value else instruction.index))
        if opcode is Opcode.NOT:
            (value,), frame = frame.pop()
            if isinstance(value, BoolValue):
                return advance(frame.push(BoolValue(not value.value)).jump())
            result, next_id = BoolVar(state.next_id), state.next_id + 1
            return advance(frame.push(result).jump(), iff(Neg(value), result), next_id=next_id)
        if opcode in BINARY_OPCODES:
            (right, left), frame = frame.pop(2)
            return self._binary(state, instruction, frame, left, right, advance)
        if opcode is Opcode.NEW:
            ref = state.fresh_ref()
            heap = {**state.heap, ref: ObjectRecord.default(self.program, instruction.class_name)}
            annotations = state.annotations | {frozenset((ref, other)) for other in state.heap}
            return advance(frame.push(Address(ref)).jump(), heap=heap, annotations=annotations)
        if opcode is Opcode.GETFIELD:
            (target,), frame = frame.pop()
            if isinstance(target, NullValue):
                return Failed(FailureReason.NULL_DEREF)
            record = self._instance(state, target)
            return advance(frame.push(record.field((instruction.class_name, instruction.name))).jump())
        if opcode is Opcode.PUTFIELD:
            (value, target), frame = frame.pop(2)
            if isinstance(target, NullValue):
                return Failed(FailureReason.NULL_DEREF)
            record = self._instance(state, target).with_field((instruction.class_name, instruction.name), value)
            assumptions = self._linked_assumptions(state, target.ref, value)
            heap = {**state.heap, target.ref: record}
            return advance(frame.jump(), heap=heap, assumptions=assumptions)
        if opcode is Opcode.CHECKCAST:
            target = frame.peek()
            if isinstance(target, Address):
                actual = self._instance(state, target).class_name
                if not self.program.is_subclass(actual, instruction.class_name):
                    return Failed(FailureReason.CAST_ERROR)
            return advance(frame.jump())
        if opcode is Opcode.INVOKE:
            return self._invoke(state, instruction)
        return self._return(state, instruction)

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _instance_request(self, state: AbstractState, value: object) -> RefinementRequest | None:
        if state.is_class_var(value):
            return RefinementRequest(RefinementKind.CLASS_INSTANCE, value.ref)
        return None

    def _comparison_request(self, state: AbstractState, left: object, right: object) -> RefinementRequest | None:
        if left == right:
            return None
        for value, other in ((left, right), (right, left)):
            if state.is_class_var(value) and isinstance(other, (Address, NullValue)):
                return RefinementRequest(RefinementKind.CLASS_INSTANCE, value.ref)
        if isinstance(left, Address) and isinstance(right, Address):
            if not state.annotated(left.ref, right.ref) and self.oracle.may_alias(state, left.ref, right.ref):
                return RefinementRequest(RefinementKind.UNSHARE, left.ref, right.ref)
        return None

    def _instance(self, state: AbstractState, target: Address) -> ObjectRecord:
        record = state.content(target.ref)
        if not isinstance(record, ObjectRecord):
            raise ValueError(f"o{target.ref} holds {record}; refine it to an instance first")
        return record

    def _binary(
        self,
        state: AbstractState,
        instruction: Instruction,
        frame: Frame,
        left: object,
        right: object,
        advance: Callable[..., SymResult],
    ) -> SymResult:
        opcode = instruction.opcode
        if opcode in (Opcode.CMP_EQ, Opcode.CMP_NEQ) and _is_reference(left) and _is_reference(right):
            # refinement leaves distinct addresses provably distinct
            equal = left == right
            result = equal if opcode is Opcode.CMP_EQ else not equal
            return advance(frame.push(BoolValue(result)).jump())
        if not (isinstance(left, (IntVar, BoolVar)) or isinstance(right, (IntVar, BoolVar))):
            return advance(frame.push(apply_binary(opcode, left, right)).jump())

        fresh = state.next_id
        if opcode in (Opcode.IADD, Opcode.ISUB):
            result = IntVar(fresh)
            constraint = Compare("=", Arith("+" if opcode is Opcode.IADD else "-", left, right), result)
        else:
            result = BoolVar(fresh)
            if opcode is Opcode.CMP_GEQ:
                formula = Compare(">=", left, right)
            elif opcode is Opcode.CMP_EQ:
                formula = Compare("=", left, right)
            elif opcode is Opcode.CMP_NEQ:
                formula = Compare("!=", left, right)
            elif opcode is Opcode.AND:
                formula = Conj((left, right))
            else:
                formula = Disj((left, right))
            constraint = iff(formula, result)
        return advance(frame.push(result).jump(), constraint, next_id=fresh + 1)

    def _linked_assumptions(self, state: AbstractState, target: int, value: object) -> Assumptions:
        if not state.assumptions:
            return state.assumptions
        value_tags = state.tags(value.ref) if isinstance(value, Address) else None
        cycle = None
        if isinstance(value, Address) and self.oracle.may_reach(state, value.ref, target):
            reaching = [ref for ref in state.heap if self.oracle.may_reach(state, ref, target)]
            cycle = frozenset().union(*(state.tags(ref) for ref in reaching))
            LOGGER.debug("Update of o%d may close a cycle through regions %s", target, sorted(cycle))
        return state.assumptions.linked(state.tags(target), value_tags, cycle)

    def _invoke(self, state: AbstractState, instruction: Instruction) -> SymResult:
        frame = state.current
        count = instruction.index
        receiver = frame.peek(count)
        if isinstance(receiver, NullValue):
            return Failed(FailureReason.NULL_DEREF)
        record = self._instance(state, receiver)
        owner, method = self.program.resolve_method(record.class_name, instruction.name)
        params = frame.stack[len(frame.stack) - count :]
        registers = (receiver, *params, *([UNIT] * method.max_locals))
        callee = Frame((), registers, owner, method.name, 0)
        stepped = replace(state, frames=state.frames + (callee,))
        return Successors(((stepped, EdgeLabel.eval(instruction)),))

    def _return(self, state: AbstractState, instruction: Instruction) -> SymResult:
        (value,), _ = state.current.pop()
        if len(state.frames) == 1:
            return Terminal(value)
        caller = state.frames[-2]
        call = self.instruction_at(caller)
        _, caller = caller.pop(call.index + 1)
        stepped = replace(state, frames=state.frames[:-2] + (caller.push(value).jump(),))
        return Successors(((collect_garbage(stepped), EdgeLabel.eval(instruction)),))

    def _substitute_null(self, state: AbstractState, ref: int) -> AbstractState:
        address = Address(ref)
        nulled = state.map_values(lambda value: NULL if value == address else value)
        heap = {key: content for key, content in nulled.heap.items() if key != ref}
        return collect_garbage(
            replace(
                nulled,
                heap=heap,
                annotations=frozenset(pair for pair in state.annotations if ref not in pair),
                regions={key: tags for key, tags in state.regions.items() if key != ref},
            )
        )


def _is_reference(value: object) -> bool:
    return isinstance(value, (Address, NullValue))
