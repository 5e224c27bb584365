"""Translation of abstract states into argument vectors of terms."""

from __future__ import annotations

from typing import Iterable

from abstraction import AbstractState, BoolVar, ClassVar, IntVar
from bytecode import Program
from machine import Address, BoolValue, IntValue, NullValue, ObjectRecord, UnitValue
from shape import ShapeOracle
from symbolic import map_leaves

from .terms import NULL_SYM, Apply, BoolLit, IntLit, Sort, Term, Var

__all__ = ["TranslationContext", "translate_value", "tst"]


class TranslationContext:
    """Variable naming shared by both sides of one rule.

    Abstract integer and Boolean variables keep their ids (``i3``, ``b4``),
    an unknown object at address ``a`` becomes ``la``, and fresh variables
    continue the ``l`` numbering past every address of the states involved.
    """

    def __init__(self, program: Program, oracle: ShapeOracle | None = None, states: Iterable[AbstractState] = ()) -> None:
        self.program = program
        self.oracle = oracle or ShapeOracle(program)
        self._next_fresh = 1 + max((max(state.heap, default=0) for state in states), default=0)
        self._cyclic: dict[tuple[int, int], bool] = {}

    def fresh(self) -> Var:
        var = Var(f"l{self._next_fresh}", Sort.UNIV)
        self._next_fresh += 1
        return var

    def maybe_cyclic(self, state: AbstractState, ref: int) -> bool:
        key = (id(state), ref)
        if key not in self._cyclic:
            self._cyclic[key] = self.oracle.maybe_cyclic(state, ref)
        return self._cyclic[key]

    def value(self, state: AbstractState, value: object, fresh_for: frozenset[int] = frozenset()) -> Term:
        if isinstance(value, (UnitValue, NullValue)):
            return NULL_SYM
        if isinstance(value, IntValue):
            return IntLit(value.value)
        if isinstance(value, BoolValue):
            return BoolLit(value.value)
        if isinstance(value, IntVar):
            return Var(str(value), Sort.INT)
        if isinstance(value, BoolVar):
            return Var(str(value), Sort.BOOL)
        if isinstance(value, Address):
            return self._object(state, value.ref, fresh_for)
        raise TypeError(f"cannot translate {value!r}")

    def leaf(self, value: object) -> Term:
        """Translation of a constraint leaf; leaves never mention addresses."""

        if isinstance(value, IntValue):
            return IntLit(value.value)
        if isinstance(value, BoolValue):
            return BoolLit(value.value)
        if isinstance(value, IntVar):
            return Var(str(value), Sort.INT)
        if isinstance(value, BoolVar):
            return Var(str(value), Sort.BOOL)
        if isinstance(value, UnitValue):
            return NULL_SYM
        raise TypeError(f"constraint leaf {value!r} is not an integer or Boolean")

    def constraint(self, constraint: object) -> object:
        return map_leaves(constraint, self.leaf)

    def state(self, state: AbstractState, fresh_for: frozenset[int] = frozenset()) -> tuple[Term, ...]:
        if not state.is_proper:
            raise ValueError(f"cannot translate a {state.kind.value} state")
        return tuple(self.value(state, value, fresh_for) for _, value in state.roots())

    def _object(self, state: AbstractState, ref: int, fresh_for: frozenset[int]) -> Term:
        content = state.content(ref)
        if ref in fresh_for:
            return self.fresh()
        if isinstance(content, ClassVar):
            return Var(f"l{ref}", Sort.UNIV)
        if self.maybe_cyclic(state, ref):
            return self.fresh()
        assert isinstance(content, ObjectRecord)
        return Apply(content.class_name, tuple(self.value(state, value, fresh_for) for value in content.values()))


def translate_value(program: Program, state: AbstractState, value: object) -> Term:
    return TranslationContext(program, states=[state]).value(state, value)


def tst(program: Program, state: AbstractState, context: TranslationContext | None = None) -> tuple[Term, ...]:
    """Stack entries of every frame, then the registers of every frame."""

    context = context or TranslationContext(program, states=[state])
    return context.state(state)
