"""Command-line entry points wiring the analysis stages together."""

from .app import EXIT_INPUT, EXIT_IO, EXIT_LIMIT, EXIT_OK, EXIT_VIOLATION, build_parser, main
from .config import RunConfig

__all__ = [
    "EXIT_INPUT",
    "EXIT_IO",
    "EXIT_LIMIT",
    "EXIT_OK",
    "EXIT_VIOLATION",
    "RunConfig",
    "build_parser",
    "main",
]
