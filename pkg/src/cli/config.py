"""Validated settings for one invocation of the command line."""

from __future__ import annotations

import argparse
import re
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from computation import GraphLimits
from shape import Assumptions, parse_assumptions

__all__ = ["RunConfig"]

_ENTRY = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*\.[A-Za-z_][A-Za-z0-9_$]*$")

Command = Literal["parse", "run", "graph", "ctrs", "simulate"]


class RunConfig(BaseModel):
    """Settings for one subcommand, checked before any work starts."""

    model_config = ConfigDict(frozen=True)

    command: Command
    path: Path
    entry: str | None = None
    args: tuple[str, ...] = ()
    assumptions: tuple[str, ...] = ()
    fuel: int = Field(default=10_000, gt=0)
    max_nodes: int = Field(default=10_000, gt=0)
    max_depth: int = Field(default=100_000, gt=0)
    this_nonnull: bool = False
    dot: Path | None = None
    dump: Path | None = None
    output: Path | None = None
    ctrs: Path | None = None

    @field_validator("entry")
    @classmethod
    def _entry_format(cls, value: str | None) -> str | None:
        if value is not None and not _ENTRY.match(value):
            raise ValueError(f"entry must have the form Class.method, got {value!r}")
        return value

    @field_validator("assumptions")
    @classmethod
    def _assumptions_parse(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        parse_assumptions(value)
        return value

    @model_validator(mode="after")
    def _entry_required(self) -> "RunConfig":
        if self.command != "parse" and self.entry is None:
            raise ValueError(f"{self.command} requires --entry Class.method")
        return self

    @classmethod
    def from_namespace(cls, namespace: argparse.Namespace) -> "RunConfig":
        fields = {name: getattr(namespace, name) for name in cls.model_fields if getattr(namespace, name, None) is not None}
        for name in ("args", "assumptions"):
            if name in fields:
                fields[name] = tuple(fields[name])
        return cls(**fields)

    # ------------------------------------------------------------------
    # Derived settings
    # ------------------------------------------------------------------
    @property
    def entry_class(self) -> str:
        return self.entry.split(".", 1)[0]

    @property
    def entry_method(self) -> str:
        return self.entry.split(".", 1)[1]

    @property
    def parsed_assumptions(self) -> Assumptions:
        return parse_assumptions(self.assumptions)

    @property
    def limits(self) -> GraphLimits:
        return GraphLimits(max_nodes=self.max_nodes, max_depth=self.max_depth)
