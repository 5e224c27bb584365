"""Sorted terms, rules and constrained rewrite systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Union

from symbolic import Constraint, Truth, leaves, map_leaves, render_constraint

__all__ = [
    "NULL_SYM",
    "Apply",
    "BoolLit",
    "Ctrs",
    "IntLit",
    "NullSym",
    "Rule",
    "Sort",
    "Symbol",
    "SymbolKind",
    "Term",
    "Var",
    "is_ground",
    "render_term",
    "substitute",
    "term_size",
    "term_variables",
]


class Sort(str, Enum):
    INT = "int"
    BOOL = "bool"
    UNIV = "univ"


class SymbolKind(str, Enum):
    DEFINED = "defined"
    CONSTRUCTOR = "constructor"


@dataclass(frozen=True, slots=True, order=True)
class Var:
    name: str
    sort: Sort = Sort.UNIV

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True, slots=True)
class NullSym:
    def __str__(self) -> str:
        return "null"


NULL_SYM = NullSym()


@dataclass(frozen=True, slots=True)
class Apply:
    symbol: str
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        return render_term(self)


Term = Union[Var, IntLit, BoolLit, NullSym, Apply]


@dataclass(frozen=True, slots=True)
class Symbol:
    name: str
    arity: int
    kind: SymbolKind


@dataclass(frozen=True, slots=True)
class Rule:
    """``lhs -> rhs [constraint]`` with a defined symbol at the root of ``lhs``."""

    lhs: Apply
    rhs: Apply
    constraint: Constraint = Truth(True)
    label: str = ""

    def variables(self) -> set[Var]:
        found = term_variables(self.lhs) | term_variables(self.rhs)
        found.update(leaf for leaf in leaves(self.constraint) if isinstance(leaf, Var))
        return found

    def extra_variables(self) -> set[Var]:
        """Variables that the left-hand side does not bind."""

        return self.variables() - term_variables(self.lhs)

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs} [{render_constraint(self.constraint)}]"


@dataclass(slots=True)
class Ctrs:
    """A signature plus the rules over it."""

    symbols: dict[str, Symbol] = field(default_factory=dict)
    rules: list[Rule] = field(default_factory=list)
    comments: dict[str, str] = field(default_factory=dict)

    def declare(self, name: str, arity: int, kind: SymbolKind) -> None:
        known = self.symbols.get(name)
        if known is not None and (known.arity, known.kind) != (arity, kind):
            raise ValueError(f"symbol {name} declared as {known.kind.value}/{known.arity} and {kind.value}/{arity}")
        self.symbols[name] = Symbol(name, arity, kind)

    def defined_symbols(self) -> list[str]:
        return [name for name, symbol in self.symbols.items() if symbol.kind is SymbolKind.DEFINED]

    def constructors(self) -> list[Symbol]:
        return [symbol for symbol in self.symbols.values() if symbol.kind is SymbolKind.CONSTRUCTOR]

    def rules_for(self, symbol: str) -> list[tuple[int, Rule]]:
        return [(index, rule) for index, rule in enumerate(self.rules) if rule.lhs.symbol == symbol]

    def check(self) -> None:
        """Raise ``ValueError`` on undeclared symbols or wrong arities."""

        for index, rule in enumerate(self.rules):
            root = self.symbols.get(rule.lhs.symbol)
            if root is None or root.kind is not SymbolKind.DEFINED:
                raise ValueError(f"rule {index}: root {rule.lhs.symbol} is not a defined symbol")
            for term in (rule.lhs, rule.rhs):
                for node in _subterms(term):
                    symbol = self.symbols.get(node.symbol)
                    if symbol is None:
                        raise ValueError(f"rule {index}: undeclared symbol {node.symbol}")
                    if symbol.arity != len(node.args):
                        raise ValueError(
                            f"rule {index}: {node.symbol} takes {symbol.arity} argument(s), got {len(node.args)}"
                        )


def _subterms(term: Term) -> Iterator[Apply]:
    if isinstance(term, Apply):
        yield term
        for arg in term.args:
            yield from _subterms(arg)


def term_size(term: Term) -> int:
    """1 for variables, null and Booleans; ``abs(z)`` for integers; 1 plus the arguments otherwise."""

    if isinstance(term, IntLit):
        return abs(term.value)
    if isinstance(term, Apply):
        return 1 + sum(term_size(arg) for arg in term.args)
    return 1


def term_variables(term: Term) -> set[Var]:
    if isinstance(term, Var):
        return {term}
    if isinstance(term, Apply):
        return set().union(*(term_variables(arg) for arg in term.args))
    return set()


def is_ground(term: Term) -> bool:
    return not term_variables(term)


def substitute(term: object, binding: Mapping[Var, Term]) -> object:
    """Apply ``binding`` to a term or to the leaves of a constraint."""

    if isinstance(term, Var):
        return binding.get(term, term)
    if isinstance(term, Apply):
        return Apply(term.symbol, tuple(substitute(arg, binding) for arg in term.args))
    if isinstance(term, (IntLit, BoolLit, NullSym)):
        return term
    return map_leaves(term, lambda leaf: substitute(leaf, binding))


def render_term(term: Term) -> str:
    if isinstance(term, Apply):
        return f"{term.symbol}({','.join(render_term(arg) for arg in term.args)})"
    return str(term)
