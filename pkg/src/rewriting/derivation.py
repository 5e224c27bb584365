"""Bounded search for long rewrite sequences from a start term."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from bytecode import Program, TypeKind
from ctrs import NULL_SYM, Apply, BoolLit, Ctrs, IntLit, Rule, Sort, Term, Var, substitute
from symbolic import Compare, Conj, Disj, Neg, evaluate

from .matching import Binding, RuleIndex, UnboundVariableError, eval_constraint, leaf_value, match_term

__all__ = ["Derivation", "DerivationPool", "derive"]

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class DerivationPool:
    """Values tried for variables that a rule's left-hand side leaves open.

    Integers range over ``int_low..int_high``; objects are ``null`` and
    constructor terms up to ``depth`` whose integer and Boolean fields hold
    ``0`` and ``false``.
    """

    int_low: int = -2
    int_high: int = 2
    depth: int = 2
    shapes: tuple[tuple[str, tuple[Sort, ...]], ...] = ()

    @classmethod
    def for_program(cls, program: Program, **options: int) -> "DerivationPool":
        shapes = []
        for name in program.classes:
            sorts = tuple(_sort_of(slot.type.kind) for slot in program.field_table_domain(name))
            shapes.append((name, sorts))
        return cls(shapes=tuple(shapes), **options)

    def values(self, sort: Sort) -> tuple[Term, ...]:
        if sort is Sort.INT:
            return tuple(IntLit(value) for value in range(self.int_low, self.int_high + 1))
        if sort is Sort.BOOL:
            return (BoolLit(False), BoolLit(True))
        return _objects(self)


def _sort_of(kind: TypeKind) -> Sort:
    if kind is TypeKind.INT:
        return Sort.INT
    if kind is TypeKind.BOOL:
        return Sort.BOOL
    return Sort.UNIV


@lru_cache(maxsize=16)
def _objects(pool: DerivationPool) -> tuple[Term, ...]:
    terms: list[Term] = [NULL_SYM]
    for _ in range(pool.depth):
        smaller = tuple(terms)
        for name, sorts in pool.shapes:
            choices = [
                (IntLit(0),) if sort is Sort.INT else (BoolLit(False),) if sort is Sort.BOOL else smaller
                for sort in sorts
            ]
            for args in itertools.product(*choices):
                term = Apply(name, args)
                if term not in terms:
                    terms.append(term)
    return tuple(terms)


@dataclass(slots=True)
class Derivation:
    """A rewrite sequence ``terms[0] -> terms[1] -> ...``.

    ``exhausted`` is set when some branch of the search used all of its
    fuel, so rewriting may go on past the reported sequence.
    """

    terms: list[Term] = field(default_factory=list)
    rules: list[int] = field(default_factory=list)
    exhausted: bool = False
    explored: int = 0

    @property
    def length(self) -> int:
        return len(self.rules)

    def as_dict(self) -> dict[str, object]:
        return {
            "length": self.length,
            "exhausted": self.exhausted,
            "explored": self.explored,
            "rules": list(self.rules),
        }


def derive(
    system: Ctrs,
    start: Term,
    fuel: int,
    pool: DerivationPool | None = None,
    max_nodes: int = 100_000,
) -> Derivation:
    """Depth-first search for the longest root rewrite sequence from ``start``.

    Open variables of a rule are solved from equalities in its constraint
    where possible and drawn from ``pool`` otherwise. The search visits at
    most ``max_nodes`` terms and follows no branch beyond ``fuel`` steps.
    """

    if fuel < 0:
        raise ValueError(f"fuel must not be negative, got {fuel}")
    pool = pool or DerivationPool()
    index = RuleIndex(system)
    if fuel == 0:
        return Derivation(terms=[start], exhausted=next(_successors(index, start, pool), None) is not None)
    best = Derivation(terms=[start])
    explored = 0
    exhausted = False

    stack: list[tuple[list[Term], list[int], Iterator[tuple[int, Term]]]] = [
        ([start], [], _successors(index, start, pool))
    ]
    while stack and explored < max_nodes:
        terms, rules, successors = stack[-1]
        step = next(successors, None)
        if step is None:
            stack.pop()
            continue
        explored += 1
        rule_index, term = step
        path_terms, path_rules = terms + [term], rules + [rule_index]
        if len(path_rules) > best.length:
            best = Derivation(terms=path_terms, rules=path_rules)
        if len(path_rules) >= fuel:
            exhausted = True
            break
        stack.append((path_terms, path_rules, _successors(index, term, pool)))

    best.exhausted = exhausted
    best.explored = explored
    LOGGER.info(
        "Derivation search visited %d term(s); longest derivation has %d step(s)%s",
        explored,
        best.length,
        " (fuel exhausted)" if best.exhausted else "",
    )
    return best


def _successors(index: RuleIndex, term: Term, pool: DerivationPool) -> Iterator[tuple[int, Term]]:
    for rule_index, rule in index.candidates(term):
        binding = match_term(rule.lhs, term)
        if binding is None:
            continue
        for extended in _instantiations(rule, binding, pool):
            try:
                if not eval_constraint(rule.constraint, extended):
                    continue
            except (UnboundVariableError, TypeError):
                continue
            yield rule_index, substitute(rule.rhs, extended)


def _instantiations(rule: Rule, binding: Binding, pool: DerivationPool) -> Iterator[Binding]:
    solved = _solve(rule.constraint, binding)
    open_vars = sorted(rule.extra_variables() - solved.keys())
    choices = [pool.values(var.sort) for var in open_vars]
    for values in itertools.product(*choices):
        yield {**solved, **dict(zip(open_vars, values))}


def _solve(constraint: object, binding: Binding) -> Binding:
    """Bind result variables of ``x+y=r`` and ``iff(f, b)`` constraints."""

    solved = dict(binding)
    parts = constraint.parts if isinstance(constraint, Conj) else (constraint,)
    for part in parts:
        target, expression = _defining(part)
        if target is None or target in solved:
            continue
        try:
            value = evaluate(expression, lambda leaf: leaf_value(leaf, solved))
        except (UnboundVariableError, TypeError):
            continue
        solved[target] = BoolLit(bool(value)) if target.sort is Sort.BOOL else IntLit(int(value))
    return solved


def _defining(part: object) -> tuple[Var | None, object]:
    if isinstance(part, Compare) and part.op == "=" and isinstance(part.right, Var) and part.right.sort is Sort.INT:
        return part.right, part.left
    if (
        isinstance(part, Disj)
        and len(part.parts) == 2
        and isinstance(part.parts[0], Conj)
        and isinstance(part.parts[1], Conj)
        and len(part.parts[0].parts) == 2
        and part.parts[1].parts == (Neg(part.parts[0].parts[0]), Neg(part.parts[0].parts[1]))
        and isinstance(part.parts[0].parts[1], Var)
        and part.parts[0].parts[1].sort is Sort.BOOL
    ):
        return part.parts[0].parts[1], part.parts[0].parts[0]
    return None, None

