"""Side conditions recorded on evaluation edges.

The constraint language is quantifier-free: comparisons ``=``, ``!=`` and
``>=`` between sums and differences of integer or Boolean leaves, closed
under conjunction, disjunction and negation. Leaves are whatever the caller
stores there: abstract variables and concrete values during symbolic
execution, rewrite terms once translated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Union

__all__ = [
    "Arith",
    "Compare",
    "Conj",
    "Constraint",
    "Disj",
    "Neg",
    "Truth",
    "evaluate",
    "iff",
    "leaves",
    "map_leaves",
    "render_constraint",
]

ARITH_OPS = ("+", "-")
COMPARE_OPS = ("=", "!=", ">=")


@dataclass(frozen=True, slots=True)
class Arith:
    op: str
    left: object
    right: object

    def __post_init__(self) -> None:
        if self.op not in ARITH_OPS:
            raise ValueError(f"unknown arithmetic operator {self.op!r}")


@dataclass(frozen=True, slots=True)
class Compare:
    op: str
    left: object
    right: object

    def __post_init__(self) -> None:
        if self.op not in COMPARE_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True, slots=True)
class Conj:
    parts: tuple[object, ...]


@dataclass(frozen=True, slots=True)
class Disj:
    parts: tuple[object, ...]


@dataclass(frozen=True, slots=True)
class Neg:
    inner: object


@dataclass(frozen=True, slots=True)
class Truth:
    value: bool


Constraint = Union[Compare, Conj, Disj, Neg, Truth]
_FORMULAS = (Compare, Conj, Disj, Neg, Truth)


def iff(formula: object, var: object) -> Constraint:
    """``formula`` holds exactly when the Boolean leaf ``var`` is true."""

    return Disj((Conj((formula, var)), Conj((Neg(formula), Neg(var)))))


def leaves(node: object) -> Iterator[object]:
    if isinstance(node, (Arith, Compare)):
        yield from leaves(node.left)
        yield from leaves(node.right)
    elif isinstance(node, (Conj, Disj)):
        for part in node.parts:
            yield from leaves(part)
    elif isinstance(node, Neg):
        yield from leaves(node.inner)
    elif not isinstance(node, Truth):
        yield node


def map_leaves(node: object, fn: Callable[[object], object]) -> object:
    if isinstance(node, Arith):
        return Arith(node.op, map_leaves(node.left, fn), map_leaves(node.right, fn))
    if isinstance(node, Compare):
        return Compare(node.op, map_leaves(node.left, fn), map_leaves(node.right, fn))
    if isinstance(node, Conj):
        return Conj(tuple(map_leaves(part, fn) for part in node.parts))
    if isinstance(node, Disj):
        return Disj(tuple(map_leaves(part, fn) for part in node.parts))
    if isinstance(node, Neg):
        return Neg(map_leaves(node.inner, fn))
    if isinstance(node, Truth):
        return node
    return fn(node)


def evaluate(node: object, value_of: Callable[[object], int | bool]) -> int | bool:
    """Evaluate ``node`` with ``value_of`` supplying the leaf values."""

    if isinstance(node, Truth):
        return node.value
    if isinstance(node, Arith):
        left, right = evaluate(node.left, value_of), evaluate(node.right, value_of)
        return left + right if node.op == "+" else left - right
    if isinstance(node, Compare):
        left, right = evaluate(node.left, value_of), evaluate(node.right, value_of)
        if node.op == "=":
            return left == right
        if node.op == "!=":
            return left != right
        return left >= right
    if isinstance(node, Conj):
        return all(evaluate(part, value_of) for part in node.parts)
    if isinstance(node, Disj):
        return any(evaluate(part, value_of) for part in node.parts)
    if isinstance(node, Neg):
        return not evaluate(node.inner, value_of)
    return value_of(node)


def render_constraint(node: object, leaf: Callable[[object], str] = str) -> str:
    """Compact text without blanks, e.g. ``i1+i2=i3``."""

    if isinstance(node, Truth):
        return "true" if node.value else "false"
    if isinstance(node, Arith):
        right = render_constraint(node.right, leaf)
        if isinstance(node.right, Arith):
            right = f"({right})"
        return f"{render_constraint(node.left, leaf)}{node.op}{right}"
    if isinstance(node, Compare):
        return f"{render_constraint(node.left, leaf)}{node.op}{render_constraint(node.right, leaf)}"
    if isinstance(node, (Conj, Disj)):
        glue = "/\\" if isinstance(node, Conj) else "\\/"
        return glue.join(_grouped(part, leaf) for part in node.parts)
    if isinstance(node, Neg):
        return f"not({render_constraint(node.inner, leaf)})"
    return leaf(node)


def _grouped(node: object, leaf: Callable[[object], str]) -> str:
    text = render_constraint(node, leaf)
    if isinstance(node, (Conj, Disj, Compare)):
        return f"({text})"
    return text
