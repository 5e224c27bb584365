"""Rewriting with generated systems: matching, derivations and run simulation."""

from .derivation import Derivation, DerivationPool, derive
from .matching import (
    Binding,
    RuleIndex,
    UnboundVariableError,
    eval_constraint,
    leaf_value,
    match_term,
    verify_step,
)
from .simulation import SimulationError, SimulationReport, SimulationStep, simulate_run

__all__ = [
    "Binding",
    "Derivation",
    "DerivationPool",
    "RuleIndex",
    "SimulationError",
    "SimulationReport",
    "SimulationStep",
    "UnboundVariableError",
    "derive",
    "eval_constraint",
    "leaf_value",
    "match_term",
    "simulate_run",
    "verify_step",
]
