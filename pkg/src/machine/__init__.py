"""Concrete virtual machine: values, states, one-step semantics and measures."""

from .graph import StateGraph, address_node, state_graph
from .interpreter import (
    ConcreteMachine,
    Failure,
    FailureReason,
    Halted,
    Next,
    RunResult,
    StepResult,
    apply_binary,
)
from .literals import ArgumentError, HeapBuilder, parse_literal
from .size import graph_size, label_size, state_size
from .state import FieldRef, Frame, JvmState, Location, ObjectRecord, RootId
from .values import (
    NULL,
    UNIT,
    Address,
    BoolValue,
    IntValue,
    NullValue,
    UnitValue,
    Value,
    default_value,
    from_literal,
    is_reference,
)

__all__ = [
    "NULL",
    "UNIT",
    "Address",
    "ArgumentError",
    "BoolValue",
    "ConcreteMachine",
    "Failure",
    "FailureReason",
    "FieldRef",
    "Frame",
    "Halted",
    "HeapBuilder",
    "IntValue",
    "JvmState",
    "Location",
    "Next",
    "NullValue",
    "ObjectRecord",
    "RootId",
    "RunResult",
    "StateGraph",
    "StepResult",
    "UnitValue",
    "Value",
    "address_node",
    "apply_binary",
    "default_value",
    "from_literal",
    "graph_size",
    "is_reference",
    "label_size",
    "parse_literal",
    "state_graph",
    "state_size",
]
