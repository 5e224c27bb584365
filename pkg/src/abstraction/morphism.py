"""The instance relation, decided by searching for a state morphism."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from bytecode import Program
from machine import Address, BoolValue, IntValue, JvmState, NullValue, ObjectRecord, UnitValue

from .beta import beta
from .state import AbstractState
from .unify import can_alias
from .values import BoolVar, ClassVar, IntVar

__all__ = ["Morphism", "equivalent", "gamma_member", "instance_of"]

LOGGER = logging.getLogger(__name__)


@dataclass(slots=True)
class Morphism:
    """Maps addresses and variables of the abstraction to instance values.

    An address of the abstraction that denotes a class variable may be sent
    to ``null`` (or ``unit``) in the instance.
    """

    addresses: dict[int, object] = field(default_factory=dict)
    variables: dict[object, object] = field(default_factory=dict)

    def image(self, value: object) -> object:
        if isinstance(value, Address):
            return self.addresses[value.ref]
        if isinstance(value, (IntVar, BoolVar)):
            return self.variables[value]
        return value

    def as_dict(self) -> dict[str, str]:
        found = {f"o{ref}": str(image) for ref, image in sorted(self.addresses.items())}
        found.update((str(var), str(image)) for var, image in sorted(self.variables.items(), key=str))
        return found


class _Matcher:
    def __init__(self, program: Program, instance: AbstractState, abstraction: AbstractState) -> None:
        self.program = program
        self.instance = instance
        self.abstraction = abstraction
        self.morphism = Morphism()

    def run(self) -> bool:
        pending: list[tuple[object, object]] = []
        for (_, general), (_, specific) in zip(self.abstraction.roots(), self.instance.roots()):
            pending.append((general, specific))
        while pending:
            general, specific = pending.pop()
            if not self._match(general, specific, pending):
                LOGGER.debug("No morphism: %s does not generalize %s", general, specific)
                return False
        return True

    def _match(self, general: object, specific: object, pending: list) -> bool:
        if isinstance(general, Address):
            return self._match_address(general.ref, specific, pending)
        if isinstance(general, IntVar):
            return self._bind(general, specific, (IntValue, IntVar, UnitValue))
        if isinstance(general, BoolVar):
            return self._bind(general, specific, (BoolValue, BoolVar, UnitValue))
        return general == specific

    def _bind(self, var: object, specific: object, allowed: tuple[type, ...]) -> bool:
        if not isinstance(specific, allowed):
            return False
        bound = self.morphism.variables.setdefault(var, specific)
        return bound == specific

    def _match_address(self, ref: int, specific: object, pending: list) -> bool:
        if not isinstance(specific, (Address, NullValue, UnitValue)):
            return False
        known = self.morphism.addresses.get(ref)
        if known is not None:
            return known == specific
        general = self.abstraction.content(ref)
        self.morphism.addresses[ref] = specific
        if isinstance(general, ClassVar):
            if not isinstance(specific, Address):
                return True
            actual = self.instance.content(specific.ref).class_name
            return self.program.is_subclass(actual, general.class_name)
        if not isinstance(specific, Address):
            return False
        concrete = self.instance.content(specific.ref)
        if not isinstance(concrete, ObjectRecord) or concrete.class_name != general.class_name:
            return False
        pending.extend(zip(general.values(), concrete.values()))
        return True

    def annotations_hold(self) -> bool:
        images = self.morphism.addresses
        for pair in self.abstraction.annotations:
            p, q = (images.get(ref) for ref in sorted(pair))
            if not (isinstance(p, Address) and isinstance(q, Address)):
                continue
            if p == q:
                return False
            if self.instance.annotated(p.ref, q.ref) or self.instance.separated(p.ref, q.ref):
                continue
            if can_alias(self.program, self.instance, p.ref, q.ref):
                return False
        return True

    def assumptions_hold(self) -> bool:
        if not self.abstraction.assumptions <= self.instance.assumptions:
            return False
        for ref, image in self.morphism.addresses.items():
            if isinstance(image, Address) and not self.abstraction.tags(ref) <= self.instance.tags(image.ref):
                return False
        return True


def _same_shape(instance: AbstractState, abstraction: AbstractState) -> bool:
    if len(instance.frames) != len(abstraction.frames):
        return False
    for mine, theirs in zip(instance.frames, abstraction.frames):
        if mine.location != theirs.location:
            return False
        if len(mine.stack) != len(theirs.stack) or len(mine.registers) != len(theirs.registers):
            return False
    return True


def instance_of(
    program: Program,
    instance: AbstractState,
    abstraction: AbstractState,
    respect_assumptions: bool = True,
) -> Morphism | None:
    """Decide ``instance`` ⊑ ``abstraction``.

    Returns the morphism from the abstraction onto the instance, or ``None``.
    The search is deterministic: roots fix the images of their values and
    field order fixes everything below them, so a single pass either builds
    the morphism or finds a conflict.

    With ``respect_assumptions`` the abstraction's shape facts must also be
    facts of the instance and every region tag must be preserved.
    """

    if instance.is_bottom or abstraction.is_top:
        return Morphism()
    if instance.is_top or abstraction.is_bottom:
        return None
    if not _same_shape(instance, abstraction):
        return None
    matcher = _Matcher(program, instance, abstraction)
    if not matcher.run() or not matcher.annotations_hold():
        return None
    if respect_assumptions and not matcher.assumptions_hold():
        return None
    return matcher.morphism


def equivalent(program: Program, left: AbstractState, right: AbstractState) -> bool:
    """Equal up to renaming of variables and addresses."""

    return (
        instance_of(program, left, right) is not None
        and instance_of(program, right, left) is not None
    )


def gamma_member(program: Program, state: JvmState, abstraction: AbstractState) -> bool:
    return instance_of(program, beta(state), abstraction, respect_assumptions=False) is not None
