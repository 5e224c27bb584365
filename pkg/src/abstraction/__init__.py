"""Abstract domain: abstract states, the instance lattice, join and reduction."""

from .beta import beta
from .join import join
from .lattice import StateLattice
from .morphism import Morphism, equivalent, gamma_member, instance_of
from .render import register_names, render_state
from .size import abs_size
from .state import AbstractState, Assumptions, StateKind, annotation, collect_garbage, pairs
from .unify import can_alias, reduce, unify
from .values import BoolVar, ClassVar, IntVar, is_variable, value_kind, variable_for

__all__ = [
    "AbstractState",
    "Assumptions",
    "BoolVar",
    "ClassVar",
    "IntVar",
    "Morphism",
    "StateKind",
    "StateLattice",
    "abs_size",
    "annotation",
    "beta",
    "can_alias",
    "collect_garbage",
    "equivalent",
    "gamma_member",
    "instance_of",
    "is_variable",
    "join",
    "pairs",
    "reduce",
    "register_names",
    "render_state",
    "unify",
    "value_kind",
    "variable_for",
]
