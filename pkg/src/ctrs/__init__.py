"""Constrained term rewrite systems obtained from computation graphs."""

from .emitter import RuleEmitter, corr_rule, emit_ctrs, node_symbol, updated_fresh_for
from .terms import (
    NULL_SYM,
    Apply,
    BoolLit,
    Ctrs,
    IntLit,
    NullSym,
    Rule,
    Sort,
    Symbol,
    SymbolKind,
    Term,
    Var,
    is_ground,
    render_term,
    substitute,
    term_size,
    term_variables,
)
from .text import CtrsSyntaxError, load_ctrs, parse_ctrs, render_ctrs
from .translation import TranslationContext, translate_value, tst

__all__ = [
    "NULL_SYM",
    "Apply",
    "BoolLit",
    "Ctrs",
    "CtrsSyntaxError",
    "IntLit",
    "NullSym",
    "Rule",
    "RuleEmitter",
    "Sort",
    "Symbol",
    "SymbolKind",
    "Term",
    "TranslationContext",
    "Var",
    "corr_rule",
    "emit_ctrs",
    "is_ground",
    "load_ctrs",
    "node_symbol",
    "parse_ctrs",
    "render_ctrs",
    "render_term",
    "substitute",
    "term_size",
    "term_variables",
    "translate_value",
    "tst",
    "updated_fresh_for",
]
