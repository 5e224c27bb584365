"""Concrete one-step semantics of Jinja bytecode."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

from bytecode import Instruction, MethodDecl, Opcode, Program, TypeRef

from .literals import ArgumentError, HeapBuilder
from .state import Frame, JvmState, ObjectRecord
from .values import UNIT, Address, BoolValue, IntValue, NullValue, Value, from_literal

__all__ = [
    "ConcreteMachine",
    "Failure",
    "FailureReason",
    "Halted",
    "Next",
    "RunResult",
    "StepResult",
    "apply_binary",
]

LOGGER = logging.getLogger(__name__)


class FailureReason(str, Enum):
    NULL_DEREF = "nullDeref"
    CAST_ERROR = "castError"
    FUEL_EXHAUSTED = "fuelExhausted"


@dataclass(frozen=True, slots=True)
class Next:
    state: JvmState


@dataclass(frozen=True, slots=True)
class Halted:
    value: Value


@dataclass(frozen=True, slots=True)
class Failure:
    reason: FailureReason


StepResult = Union[Next, Halted, Failure]


@dataclass(slots=True)
class RunResult:
    """Outcome of :meth:`ConcreteMachine.run`.

    ``steps`` counts the ``Next`` transitions taken; the final ``Return`` of
    the entry frame is not a transition. ``trace`` is empty when trace
    retention was switched off.
    """

    outcome: Union[Halted, Failure]
    steps: int
    final_state: JvmState
    trace: list[JvmState] = field(default_factory=list)

    @property
    def halted(self) -> bool:
        return isinstance(self.outcome, Halted)

    def as_dict(self) -> dict[str, object]:
        if isinstance(self.outcome, Halted):
            outcome = {"halted": str(self.outcome.value)}
        else:
            outcome = {"failure": self.outcome.reason.value}
        return {**outcome, "steps": self.steps, "trace_length": len(self.trace)}


def apply_binary(opcode: Opcode, left: Value, right: Value) -> Value:
    """Evaluate ``left op right`` where ``right`` was the top of the stack."""

    if opcode is Opcode.CMP_EQ:
        return BoolValue(left == right)
    if opcode is Opcode.CMP_NEQ:
        return BoolValue(left != right)
    if opcode in (Opcode.IADD, Opcode.ISUB, Opcode.CMP_GEQ):
        if not (isinstance(left, IntValue) and isinstance(right, IntValue)):
            raise TypeError(f"{opcode.value} expects integers, got {left} and {right}")
        if opcode is Opcode.IADD:
            return IntValue(left.value + right.value)
        if opcode is Opcode.ISUB:
            return IntValue(left.value - right.value)
        return BoolValue(left.value >= right.value)
    if not (isinstance(left, BoolValue) and isinstance(right, BoolValue)):
        raise TypeError(f"{opcode.value} expects Booleans, got {left} and {right}")
    if opcode is Opcode.AND:
        return BoolValue(left.value and right.value)
    if opcode is Opcode.OR:
        return BoolValue(left.value or right.value)
    raise ValueError(f"{opcode.value} is not a binary operator")


class ConcreteMachine:
    """Executes a :class:`~bytecode.Program` one instruction at a time."""

    def __init__(self, program: Program) -> None:
        self.program = program
        self._methods: dict[tuple[str, str], MethodDecl] = {}

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    def initial_state(self, entry_class: str, method_name: str, args: Sequence[str]) -> JvmState:
        """Entry state for ``entry_class.method_name``.

        ``args`` holds argument literals, ``this`` first, then one per
        parameter.

        Raises
        ------
        ArgumentError
            Wrong arity, an ill-typed value or a malformed literal.
        MethodNotFoundError
            The entry method does not exist.
        """

        owner, method = self.program.resolve_method(entry_class, method_name)
        expected = 1 + len(method.params)
        if len(args) != expected:
            raise ArgumentError(
                f"{entry_class}.{method_name} expects {expected} argument(s) "
                f"(this first), got {len(args)}"
            )
        builder = HeapBuilder(self.program)
        this = builder.add(args[0], TypeRef.of_class(entry_class))
        if not isinstance(this, Address):
            raise ArgumentError(f"this must be an object of class {entry_class}, got {this}")
        params = tuple(builder.add(text, param.type) for text, param in zip(args[1:], method.params))
        heap = builder.finish()
        registers = (this, *params, *([UNIT] * method.max_locals))
        return JvmState(heap, (Frame((), registers, owner, method_name, 0),))

    def instruction_at(self, frame: Frame) -> Instruction:
        return self._method(frame.class_name, frame.method_name).body[frame.pc]

    def step(self, state: JvmState) -> StepResult:
        frame = state.current
        instruction = self.instruction_at(frame)
        opcode = instruction.opcode

        if opcode is Opcode.LOAD:
            return Next(state.with_current(frame.push(frame.registers[instruction.index]).jump()))
        if opcode is Opcode.STORE:
            (value,), frame = frame.pop()
            return Next(state.with_current(frame.store(instruction.index, value).jump()))
        if opcode is Opcode.PUSH:
            return Next(state.with_current(frame.push(from_literal(instruction.literal)).jump()))
        if opcode is Opcode.POP:
            _, frame = frame.pop()
            return Next(state.with_current(frame.jump()))
        if opcode is Opcode.NOT:
            (value,), frame = frame.pop()
            return Next(state.with_current(frame.push(BoolValue(not value.value)).jump()))
        if opcode is Opcode.GOTO:
            return Next(state.with_current(frame.jump(instruction.index)))
        if opcode is Opcode.IF_FALSE:
            (value,), frame = frame.pop()
            offset = 1 if value.value else instruction.index
            return Next(state.with_current(frame.jump(offset)))
        if opcode is Opcode.NEW:
            ref = state.fresh_ref()
            heap = {**state.heap, ref: ObjectRecord.default(self.program, instruction.class_name)}
            return Next(state.with_current(frame.push(Address(ref)).jump(), heap))
        if opcode is Opcode.GETFIELD:
            (target,), frame = frame.pop()
            if isinstance(target, NullValue):
                return Failure(FailureReason.NULL_DEREF)
            value = state.heap[target.ref].field((instruction.class_name, instruction.name))
            return Next(state.with_current(frame.push(value).jump()))
        if opcode is Opcode.PUTFIELD:
            (value, target), frame = frame.pop(2)
            if isinstance(target, NullValue):
                return Failure(FailureReason.NULL_DEREF)
            record = state.heap[target.ref].with_field((instruction.class_name, instruction.name), value)
            return Next(state.with_current(frame.jump(), {**state.heap, target.ref: record}))
        if opcode is Opcode.CHECKCAST:
            target = frame.peek()
            if isinstance(target, Address):
                actual = state.heap[target.ref].class_name
                if not self.program.is_subclass(actual, instruction.class_name):
                    return Failure(FailureReason.CAST_ERROR)
            return Next(state.with_current(frame.jump()))
        if opcode is Opcode.INVOKE:
            return self._invoke(state, instruction)
        if opcode is Opcode.RETURN:
            return self._return(state)

        (right, left), frame = frame.pop(2)
        return Next(state.with_current(frame.push(apply_binary(opcode, left, right)).jump()))

    def run(self, state: JvmState, fuel: int, keep_trace: bool = True) -> RunResult:
        """Iterate :meth:`step` at most ``fuel`` times."""

        if fuel <= 0:
            raise ValueError(f"fuel must be positive, got {fuel}")
        trace = [state] if keep_trace else []
        steps = 0
        while True:
            result = self.step(state)
            if not isinstance(result, Next):
                break
            if steps >= fuel:
                result = Failure(FailureReason.FUEL_EXHAUSTED)
                break
            steps += 1
            state = result.state
            if keep_trace:
                trace.append(state)
        LOGGER.info("Concrete run finished after %d step(s): %s", steps, _describe(result))
        return RunResult(result, steps, state, trace)

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _method(self, class_name: str, method_name: str) -> MethodDecl:
        key = (class_name, method_name)
        method = self._methods.get(key)
        if method is None:
            method = self.program.class_decl(class_name).find_method(method_name)
            if method is None:
                raise LookupError(f"frame refers to unknown method {class_name}.{method_name}")
            self._methods[key] = method
        return method

    def _invoke(self, state: JvmState, instruction: Instruction) -> StepResult:
        frame = state.current
        count = instruction.index
        receiver = frame.peek(count)
        if isinstance(receiver, NullValue):
            return Failure(FailureReason.NULL_DEREF)
        owner, method = self.program.resolve_method(state.heap[receiver.ref].class_name, instruction.name)
        params = frame.stack[len(frame.stack) - count :]
        registers = (receiver, *params, *([UNIT] * method.max_locals))
        callee = Frame((), registers, owner, method.name, 0)
        return Next(JvmState(state.heap, state.frames + (callee,)))

    def _return(self, state: JvmState) -> StepResult:
        (value,), _ = state.current.pop()
        if len(state.frames) == 1:
            return Halted(value)
        caller = state.frames[-2]
        call = self.instruction_at(caller)
        _, caller = caller.pop(call.index + 1)
        return Next(JvmState(state.heap, state.frames[:-2] + (caller.push(value).jump(),)))


def _describe(result: StepResult) -> str:
    if isinstance(result, Halted):
        return f"halted with {result.value}"
    if isinstance(result, Failure):
        return result.reason.value
    return "running"
