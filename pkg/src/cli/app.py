"""Batch entry point: ``jbc2ctrs {parse|run|graph|ctrs|simulate} FILE``.

Results go to stdout (or the file named by ``-o``), diagnostics and logs to
stderr. Exit codes: 0 success, 1 I/O or internal error, 2 rejected input,
3 analysis limit or fuel exhausted, 4 property violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

from pydantic import ValidationError

from abstraction import beta, render_state
from bytecode import (
    JbcSyntaxError,
    MethodNotFoundError,
    Program,
    ProgramError,
    check_wellformed,
    load_program,
    render_program,
)
from computation import (
    AnalysisLimitError,
    ComputationGraph,
    WitnessNotFoundError,
    build_graph,
    dump_graph,
    export_dot,
    initial_abstract_state,
)
from ctrs import CtrsSyntaxError, emit_ctrs, load_ctrs, render_ctrs
from machine import ArgumentError, ConcreteMachine, Failure, FailureReason, JvmState
from rewriting import SimulationError, simulate_run
from shape import AssumptionError, AssumptionViolation, check_assumptions

from .config import RunConfig

__all__ = ["EXIT_INPUT", "EXIT_IO", "EXIT_LIMIT", "EXIT_OK", "EXIT_VIOLATION", "build_parser", "main"]

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3
EXIT_VIOLATION = 4


class ProgramRejected(ValueError):
    """The program parsed but is not well-formed."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("path", metavar="FILE", type=Path, help="bytecode listing (.jbc)")
    common.add_argument("-v", "--verbose", action="store_true", help="log stage summaries")
    common.add_argument("--debug", action="store_true", help="log per-step detail")
    common.add_argument("-o", "--output", type=Path, metavar="P", help="write the result to P instead of stdout")

    entry = argparse.ArgumentParser(add_help=False)
    entry.add_argument("--entry", metavar="C.m", help="entry method")

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--assume", dest="assumptions", action="append", metavar="K:V",
                          help="acyclic:R or unshared:R,S (repeatable)")
    analysis.add_argument("--this-nonnull", action="store_true", help="start from a non-null receiver")
    analysis.add_argument("--max-nodes", type=int, help="computation-graph node limit")
    analysis.add_argument("--max-depth", type=int, help="computation-graph depth limit")

    concrete = argparse.ArgumentParser(add_help=False)
    concrete.add_argument("--arg", dest="args", action="append", metavar="LIT",
                          help="argument literal, this first (repeatable)")
    concrete.add_argument("--fuel", type=int, help="maximum number of concrete steps")

    parser = argparse.ArgumentParser(prog="jbc2ctrs", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("parse", parents=[common], help="check and pretty-print a program")
    commands.add_parser("run", parents=[common, entry, concrete], help="execute a method concretely")
    graph = commands.add_parser("graph", parents=[common, entry, analysis], help="build the computation graph")
    graph.add_argument("--dot", type=Path, metavar="P", help="write DOT source to P")
    graph.add_argument("--dump", type=Path, metavar="P", help="write the line-oriented graph dump to P")
    commands.add_parser("ctrs", parents=[common, entry, analysis], help="emit the rewrite system")
    simulate = commands.add_parser("simulate", parents=[common, entry, analysis, concrete],
                                   help="replay a concrete run with the rewrite system")
    simulate.add_argument("--ctrs", type=Path, metavar="P", help="replay with the system in P instead")
    return parser


def configure_logging(verbose: bool, debug: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    namespace = build_parser().parse_args(argv)
    configure_logging(namespace.verbose, namespace.debug)
    try:
        config = RunConfig.from_namespace(namespace)
    except ValidationError as exc:
        for error in exc.errors():
            print(f"error: {error['msg']}", file=sys.stderr)
        return EXIT_INPUT

    try:
        return COMMANDS[config.command](config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AnalysisLimitError as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (SimulationError, WitnessNotFoundError, AssumptionViolation) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (
        JbcSyntaxError,
        ProgramError,
        ProgramRejected,
        MethodNotFoundError,
        ArgumentError,
        AssumptionError,
        CtrsSyntaxError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:  # pragma: no cover - reported, not re-raised
        LOGGER.exception("Unexpected failure while running %s", config.command)
        return EXIT_IO


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------
def cmd_parse(config: RunConfig) -> int:
    program = _load(config)
    _emit(config, render_program(program))
    return EXIT_OK


def cmd_run(config: RunConfig) -> int:
    program = _load(config)
    machine = ConcreteMachine(program)
    state = machine.initial_state(config.entry_class, config.entry_method, config.args)
    result = machine.run(state, config.fuel, keep_trace=False)
    lines = [f"m = {result.steps}"]
    if isinstance(result.outcome, Failure):
        lines.append(f"failed {result.outcome.reason.value}")
    else:
        lines.append(f"returns {result.outcome.value}")
    lines.extend(render_state(beta(result.final_state), program).splitlines())
    _emit(config, "\n".join(lines) + "\n")
    return _failure_code(result.outcome)


def cmd_graph(config: RunConfig) -> int:
    program = _load(config)
    graph = _graph(program, config)
    if config.dot is not None:
        config.dot.write_text(export_dot(graph, program), encoding="utf-8")
    if config.dump is not None:
        config.dump.write_text(dump_graph(graph, program), encoding="utf-8")
    edges = sum(1 for _ in graph.edges())
    _emit(config, f"nodes: {len(graph)}\nedges: {edges}\n")
    return EXIT_OK


def cmd_ctrs(config: RunConfig) -> int:
    program = _load(config)
    system = emit_ctrs(program, _graph(program, config))
    _emit(config, render_ctrs(system))
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    program = _load(config)
    machine = ConcreteMachine(program)
    state = machine.initial_state(config.entry_class, config.entry_method, config.args)
    check_assumptions(state, _roots(program, config, state), config.parsed_assumptions)
    result = machine.run(state, config.fuel)
    code = _failure_code(result.outcome)
    if code != EXIT_OK:
        print(f"run failed: {result.outcome.reason.value}", file=sys.stderr)
        return code

    graph = _graph(program, config)
    system = load_ctrs(config.ctrs) if config.ctrs is not None else emit_ctrs(program, graph)
    report = simulate_run(program, graph, system, result.trace)
    _emit(config, report.render())
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "parse": cmd_parse,
    "run": cmd_run,
    "graph": cmd_graph,
    "ctrs": cmd_ctrs,
    "simulate": cmd_simulate,
}


# ----------------------------------------------------------------------
# Internal helpers
# ----------------------------------------------------------------------
def _load(config: RunConfig) -> Program:
    program = load_program(config.path)
    diagnostics = check_wellformed(program)
    if diagnostics:
        for diagnostic in diagnostics:
            print(str(diagnostic), file=sys.stderr)
        raise ProgramRejected(f"{config.path}: {len(diagnostics)} diagnostic(s)")
    return program


def _graph(program: Program, config: RunConfig) -> ComputationGraph:
    if config.parsed_assumptions:
        print(
            f"warning: assuming {config.parsed_assumptions} for every input without checking it; "
            "results only cover inputs that satisfy these assumptions",
            file=sys.stderr,
        )
    initial = initial_abstract_state(
        program,
        config.entry_class,
        config.entry_method,
        config.parsed_assumptions,
        this_nonnull=config.this_nonnull,
    )
    return build_graph(program, initial, config.limits)


def _roots(program: Program, config: RunConfig, state: JvmState) -> dict[str, object]:
    _, method = program.resolve_method(config.entry_class, config.entry_method)
    registers = state.current.registers
    roots: dict[str, object] = {"this": registers[0]}
    for index, param in enumerate(method.params, start=1):
        roots[param.name] = registers[index]
    return roots


def _failure_code(outcome: object) -> int:
    if not isinstance(outcome, Failure):
        return EXIT_OK
    if outcome.reason is FailureReason.FUEL_EXHAUSTED:
        return EXIT_LIMIT
    return EXIT_VIOLATION


def _emit(config: RunConfig, text: str) -> None:
    if config.output is not None:
        config.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
