"""DOT export and the line-oriented graph dump."""

from __future__ import annotations

from graphviz import Digraph

from abstraction import render_state
from bytecode import Program
from symbolic import EdgeKind

from .graph import ComputationGraph

__all__ = ["dump_graph", "export_dot", "node_title"]

_EDGE_STYLES = {
    EdgeKind.EVAL: "solid",
    EdgeKind.REFINE: "dotted",
    EdgeKind.INSTANCE: "dashed",
}


def node_title(graph: ComputationGraph, node: int) -> str:
    locations = " / ".join(f"{cls}.{method} {pc:02d}" for cls, method, pc in graph.state(node).locations)
    return f"n{node} [{graph.origin(node).value}] {locations}"


def export_dot(graph: ComputationGraph, program: Program | None = None, name: str = "computation") -> str:
    """Render ``graph`` as DOT source; output only depends on the graph."""

    dot = Digraph(name=name, comment=f"Computation graph with {len(graph)} node(s)")
    dot.attr("node", shape="box", fontname="monospace")
    for node in graph.nodes():
        lines = [node_title(graph, node), *render_state(graph.state(node), program).splitlines()]
        outcome = graph.outcome(node)
        if outcome is not None:
            lines.append(str(outcome))
        dot.node(f"n{node}", "\\l".join(lines) + "\\l")
    for source, target, label in graph.edges():
        dot.edge(f"n{source}", f"n{target}", label=str(label), style=_EDGE_STYLES[label.kind])
    return dot.source


def dump_graph(graph: ComputationGraph, program: Program | None = None) -> str:
    """Nodes with their rendered states, then one line per edge."""

    lines: list[str] = []
    for node in graph.nodes():
        lines.append(node_title(graph, node))
        lines.extend(f"  {line}" for line in render_state(graph.state(node), program).splitlines())
        outcome = graph.outcome(node)
        if outcome is not None:
            lines.append(f"  {outcome}")
    for source, target, label in graph.edges():
        text = f"n{source} -> n{target} {label.kind.value}"
        if label.instruction is not None:
            text += f" {label.instruction}"
        if label.kind is EdgeKind.REFINE:
            text += f" {label.refinement.value}"
        if label.constraint is not None:
            text += f" [{label}]"
        lines.append(text)
    return "\n".join(lines) + "\n"
