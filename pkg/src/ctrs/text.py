"""The ``.ctrs`` text format: rendering and parsing.

Layout::

    (SORTS int bool univ)
    (SIG
      f_0 2 defined "n0 [entry] List.append 00"
      List 2 constructor
    )
    (RULES
      (VAR l1:univ l2:univ)
      f_0(l1,l2) -> f_1(l1,l2) [true] "n0 -> n1 eval Load 0"
    )

Constructors are always written with parentheses, so a bare name is a
variable of the enclosing ``VAR`` block.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from symbolic import Arith, Compare, Conj, Disj, Neg, Truth, map_leaves, render_constraint

from .terms import NULL_SYM, Apply, BoolLit, Ctrs, IntLit, Rule, Sort, Symbol, SymbolKind, Var, render_term

__all__ = ["CtrsSyntaxError", "load_ctrs", "parse_ctrs", "render_ctrs"]

GRAMMAR_PATH = Path(__file__).with_name("ctrs.lark")


class CtrsSyntaxError(ValueError):
    """Malformed ``.ctrs`` text."""


def render_ctrs(system: Ctrs) -> str:
    lines = [f"(SORTS {' '.join(sort.value for sort in Sort)})", "(SIG"]
    for symbol in system.symbols.values():
        entry = f"  {symbol.name} {symbol.arity} {symbol.kind.value}"
        comment = system.comments.get(symbol.name)
        if comment:
            entry += f" {_quote(comment)}"
        lines.append(entry)
    lines.append(")")
    lines.append("(RULES")
    for rule in system.rules:
        declared = " ".join(f"{var.name}:{var.sort.value}" for var in sorted(rule.variables()))
        lines.append(f"  (VAR {declared})" if declared else "  (VAR)")
        text = f"  {render_term(rule.lhs)} -> {render_term(rule.rhs)} [{render_constraint(rule.constraint)}]"
        if rule.label:
            text += f" {_quote(rule.label)}"
        lines.append(text)
    lines.append(")")
    return "\n".join(lines) + "\n"


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _unquote(token: Token) -> str:
    return token[1:-1].replace('\\"', '"').replace("\\\\", "\\")


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(GRAMMAR_PATH.read_text(encoding="utf-8"), parser="lalr", maybe_placeholders=True)


class _CtrsBuilder(Transformer):
    def start(self, children):
        sorts, (symbols, comments), rules = children
        system = Ctrs(symbols=symbols, rules=rules, comments=comments)
        system.check()
        return system

    def sorts(self, children):
        names = [str(token) for token in children]
        unknown = sorted(set(names) - {sort.value for sort in Sort})
        if unknown:
            raise CtrsSyntaxError(f"unknown sort(s) {', '.join(unknown)}")
        return names

    def signature(self, children):
        symbols: dict[str, Symbol] = {}
        comments: dict[str, str] = {}
        for symbol, comment in children:
            if symbol.name in symbols:
                raise CtrsSyntaxError(f"symbol {symbol.name} declared twice")
            symbols[symbol.name] = symbol
            if comment:
                comments[symbol.name] = comment
        return symbols, comments

    def symbol(self, children):
        name, arity, kind, comment = children
        try:
            symbol_kind = SymbolKind(str(kind))
        except ValueError:
            raise CtrsSyntaxError(f"unknown symbol kind {kind!s} for {name!s}") from None
        return Symbol(str(name), int(arity), symbol_kind), _unquote(comment) if comment is not None else ""

    def rules(self, children):
        return list(children)

    def rule_block(self, children):
        sorts, (lhs, rhs, constraint, label) = children
        resolve = _Resolver(sorts)
        lhs, rhs = resolve.term(lhs), resolve.term(rhs)
        if not isinstance(lhs, Apply) or not isinstance(rhs, Apply):
            raise CtrsSyntaxError(f"rule sides must be applications, got {lhs} -> {rhs}")
        return Rule(lhs, rhs, map_leaves(constraint, resolve.term), label)

    def variables(self, children):
        sorts: dict[str, Sort] = {}
        for name, sort in children:
            sorts[name] = sort
        return sorts

    def declaration(self, children):
        name, sort = children
        try:
            return str(name), Sort(str(sort))
        except ValueError:
            raise CtrsSyntaxError(f"unknown sort {sort!s} for variable {name!s}") from None

    def rule(self, children):
        lhs, rhs, constraint, label = children
        return lhs, rhs, constraint, _unquote(label) if label is not None else ""

    def apply(self, children):
        name, *args = children
        return Apply(str(name), tuple(arg for arg in args if arg is not None))

    def name(self, children):
        return Var(str(children[0]))

    def integer(self, children):
        return IntLit(int("".join(str(token) for token in children)))

    def null(self, _):
        return NULL_SYM

    def true(self, _):
        return BoolLit(True)

    def false(self, _):
        return BoolLit(False)

    def true_formula(self, _):
        return Truth(True)

    def false_formula(self, _):
        return Truth(False)

    def bool_leaf(self, children):
        return Var(str(children[0]))

    def negation(self, children):
        return Neg(children[0])

    def disjunction(self, children):
        return Disj(tuple(children))

    def conjunction(self, children):
        return Conj(tuple(children))

    def comparison(self, children):
        left, op, right = children
        return Compare(str(op), left, right)

    def sum(self, children):
        result = children[0]
        for index in range(1, len(children), 2):
            result = Arith(str(children[index]), result, children[index + 1])
        return result

    def addop(self, children):
        return str(children[0])


class _Resolver:
    def __init__(self, sorts: dict[str, Sort]) -> None:
        self.sorts = sorts

    def term(self, term: object) -> object:
        if isinstance(term, Var):
            sort = self.sorts.get(term.name)
            if sort is None:
                raise CtrsSyntaxError(f"variable {term.name} is not declared in the rule's VAR block")
            return Var(term.name, sort)
        if isinstance(term, Apply):
            return Apply(term.symbol, tuple(self.term(arg) for arg in term.args))
        return term


def parse_ctrs(text: str) -> Ctrs:
    """Parse ``.ctrs`` text; raises :class:`CtrsSyntaxError` on malformed input."""

    try:
        tree = _parser().parse(text)
    except UnexpectedInput as exc:
        raise CtrsSyntaxError(
            f"line {getattr(exc, 'line', 0)}, column {getattr(exc, 'column', 0)}: unexpected input"
        ) from None
    try:
        return _CtrsBuilder().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, CtrsSyntaxError):
            raise exc.orig_exc from None
        if isinstance(exc.orig_exc, ValueError):
            raise CtrsSyntaxError(str(exc.orig_exc)) from None
        raise


def load_ctrs(path: str | Path) -> Ctrs:
    return parse_ctrs(Path(path).read_text(encoding="utf-8"))
