"""Computation graphs: construction with widening, concrete tracing and export."""

from .builder import AnalysisLimitError, GraphBuilder, GraphLimits, build_graph, initial_abstract_state
from .export import dump_graph, export_dot, node_title
from .graph import ComputationGraph, NodeOrigin, Outcome
from .trace import TraceReport, WitnessNotFoundError, max_step_length, trace_concrete

__all__ = [
    "AnalysisLimitError",
    "ComputationGraph",
    "GraphBuilder",
    "GraphLimits",
    "NodeOrigin",
    "Outcome",
    "TraceReport",
    "WitnessNotFoundError",
    "build_graph",
    "dump_graph",
    "export_dot",
    "initial_abstract_state",
    "max_step_length",
    "node_title",
    "trace_concrete",
]
