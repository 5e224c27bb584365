"""The abstract domain bound to one program."""

from __future__ import annotations

from bytecode import Program
from machine import JvmState

from .beta import beta
from .join import join
from .morphism import Morphism, equivalent, gamma_member, instance_of
from .size import abs_size
from .state import AbstractState
from .unify import can_alias, reduce, unify

__all__ = ["StateLattice"]


class StateLattice:
    """Lattice operations over the abstract states of ``program``."""

    def __init__(self, program: Program) -> None:
        self.program = program

    def leq(self, instance: AbstractState, abstraction: AbstractState) -> bool:
        return instance_of(self.program, instance, abstraction) is not None

    def instance_of(
        self, instance: AbstractState, abstraction: AbstractState, respect_assumptions: bool = True
    ) -> Morphism | None:
        return instance_of(self.program, instance, abstraction, respect_assumptions)

    def equivalent(self, left: AbstractState, right: AbstractState) -> bool:
        return equivalent(self.program, left, right)

    def join(self, left: AbstractState, right: AbstractState) -> AbstractState:
        return join(self.program, left, right)

    def join_all(self, states: list[AbstractState]) -> AbstractState:
        result = AbstractState.bottom()
        for state in states:
            result = self.join(result, state)
        return result

    def reduce(self, state: AbstractState) -> AbstractState:
        return reduce(self.program, state)

    def unify(self, state: AbstractState, p: int, q: int) -> AbstractState | None:
        return unify(self.program, state, p, q)

    def can_alias(self, state: AbstractState, p: int, q: int) -> bool:
        return can_alias(self.program, state, p, q)

    def gamma_member(self, state: JvmState, abstraction: AbstractState) -> bool:
        return gamma_member(self.program, state, abstraction)

    @staticmethod
    def beta(state: JvmState) -> AbstractState:
        return beta(state)

    @staticmethod
    def size(state: AbstractState) -> int:
        return abs_size(state)
