"""Matching, constraint evaluation and single-step verification at the root."""

from __future__ import annotations

import logging
from typing import Dict, Mapping

from ctrs import Apply, BoolLit, Ctrs, IntLit, NullSym, Rule, Sort, Term, Var, substitute
from symbolic import evaluate

__all__ = [
    "Binding",
    "RuleIndex",
    "UnboundVariableError",
    "eval_constraint",
    "leaf_value",
    "match_term",
    "verify_step",
]

LOGGER = logging.getLogger(__name__)

Binding = Dict[Var, Term]


class UnboundVariableError(KeyError):
    """A constraint mentions a variable the binding does not cover."""


def eval_constraint(constraint: object, binding: Mapping[Var, Term]) -> bool:
    """Ground evaluation of ``constraint`` under ``binding``.

    ``null`` in an integer or Boolean position stands for an unset register
    and evaluates to ``0`` or ``false``.
    """

    return bool(evaluate(constraint, lambda leaf: leaf_value(leaf, binding)))


def leaf_value(leaf: object, binding: Mapping[Var, Term]) -> int | bool:
    if isinstance(leaf, Var):
        if leaf not in binding:
            raise UnboundVariableError(f"variable {leaf.name} is unbound")
        leaf = binding[leaf]
    if isinstance(leaf, (IntLit, BoolLit)):
        return leaf.value
    if isinstance(leaf, NullSym):
        return 0
    raise TypeError(f"{leaf} is not an integer or Boolean value")


def _admits(var: Var, subject: Term) -> bool:
    if var.sort is Sort.INT:
        return isinstance(subject, (IntLit, NullSym)) or (isinstance(subject, Var) and subject.sort is Sort.INT)
    if var.sort is Sort.BOOL:
        return isinstance(subject, (BoolLit, NullSym)) or (isinstance(subject, Var) and subject.sort is Sort.BOOL)
    return isinstance(subject, (Apply, NullSym)) or (isinstance(subject, Var) and subject.sort is Sort.UNIV)


def match_term(pattern: Term, subject: Term, binding: Mapping[Var, Term] | None = None) -> Binding | None:
    """Extend ``binding`` so that ``pattern`` instantiates to ``subject``.

    Variables of the subject are rigid. Repeated pattern variables must
    bind to equal terms; integer and Boolean variables bind only to values
    of their sort.
    """

    result: Binding = dict(binding or {})
    pending = [(pattern, subject)]
    while pending:
        left, right = pending.pop()
        if isinstance(left, Var):
            if not _admits(left, right):
                return None
            bound = result.get(left)
            if bound is None:
                result[left] = right
            elif bound != right:
                return None
        elif isinstance(left, Apply):
            if not isinstance(right, Apply) or left.symbol != right.symbol or len(left.args) != len(right.args):
                return None
            pending.extend(zip(left.args, right.args))
        elif left != right:
            return None
    return result


class RuleIndex:
    """Rules of a system grouped by the defined symbol at their root."""

    def __init__(self, system: Ctrs) -> None:
        self.system = system
        self.by_root: dict[str, list[tuple[int, Rule]]] = {}
        for index, rule in enumerate(system.rules):
            self.by_root.setdefault(rule.lhs.symbol, []).append((index, rule))
        self.defined = frozenset(system.defined_symbols())

    def candidates(self, term: Term) -> list[tuple[int, Rule]]:
        if not isinstance(term, Apply):
            return []
        return self.by_root.get(term.symbol, [])

    def is_normal(self, term: Term) -> bool:
        """No defined symbol occurs in ``term``."""

        if isinstance(term, Apply):
            return term.symbol not in self.defined and all(self.is_normal(arg) for arg in term.args)
        return True

    def verify_step(self, source: Term, target: Term) -> int | None:
        """Index of a rule rewriting ``source`` to ``target`` at the root, if any.

        Variables the left-hand side leaves open are read off ``target`` and
        must be bound to normal forms.
        """

        if not isinstance(target, Apply):
            return None
        for index, rule in self.candidates(source):
            if rule.rhs.symbol != target.symbol:
                continue
            binding = match_term(rule.lhs, source)
            if binding is None:
                continue
            extended = match_term(rule.rhs, target, binding)
            if extended is None:
                continue
            if not all(self.is_normal(extended[var]) for var in extended.keys() - binding.keys()):
                continue
            try:
                holds = eval_constraint(rule.constraint, extended)
            except UnboundVariableError:
                LOGGER.debug("Rule %d leaves constraint variables unbound", index)
                continue
            if holds and substitute(rule.rhs, extended) == target:
                return index
        return None


def verify_step(system: Ctrs, source: Term, target: Term) -> int | None:
    return RuleIndex(system).verify_step(source, target)


