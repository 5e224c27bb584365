"""The class table and the relations derived from it."""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .types import OBJECT, ClassDecl, FieldSlot, MethodDecl, TypeKind, TypeRef

__all__ = ["MethodNotFoundError", "Program", "ProgramError"]


class ProgramError(ValueError):
    """Raised for inconsistent declarations (duplicates, unknown classes)."""


class MethodNotFoundError(LookupError):
    """Raised when method resolution walks past ``Object``."""


class Program:
    """A bytecode program: class declarations plus cached hierarchy queries.

    The caches are computed once in the constructor from the immutable
    declarations, so they never drift from them.
    """

    def __init__(self, classes: Iterable[ClassDecl]) -> None:
        table: dict[str, ClassDecl] = {}
        for decl in classes:
            if decl.name in table:
                raise ProgramError(f"Duplicate class {decl.name!r}.")
            table[decl.name] = decl
        if OBJECT not in table:
            table = {OBJECT: ClassDecl(OBJECT, None), **table}
        self._classes: dict[str, ClassDecl] = table

        for decl in table.values():
            self._check_members(decl)
            if decl.name == OBJECT:
                if decl.superclass is not None:
                    raise ProgramError("Object cannot declare a superclass.")
            elif decl.superclass not in table:
                raise ProgramError(
                    f"Class {decl.name!r} extends unknown class {decl.superclass!r}."
                )

        self._ancestors = {name: self._walk_up(name) for name in table}
        self._children: dict[str, list[str]] = {name: [] for name in table}
        for decl in table.values():
            if decl.superclass is not None:
                self._children[decl.superclass].append(decl.name)
        self._field_domains = {name: self._build_domain(name) for name in table}

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------
    @property
    def classes(self) -> Mapping[str, ClassDecl]:
        return self._classes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Program):
            return NotImplemented
        return self._classes == other._classes

    __hash__ = None  # type: ignore[assignment]

    def class_decl(self, name: str) -> ClassDecl:
        try:
            return self._classes[name]
        except KeyError:
            raise ProgramError(f"Unknown class {name!r}.") from None

    def has_class(self, name: str) -> bool:
        return name in self._classes

    def superclasses(self, name: str) -> tuple[str, ...]:
        """``name`` followed by its ancestors up to ``Object``."""

        self.class_decl(name)
        return self._ancestors[name]

    def is_subclass(self, name: str, other: str) -> bool:
        return other in self.superclasses(name)

    def subclasses(self, name: str) -> tuple[str, ...]:
        """``name`` and all its descendants in declaration pre-order."""

        self.class_decl(name)
        found: list[str] = []
        pending = [name]
        while pending:
            current = pending.pop()
            found.append(current)
            pending.extend(reversed(self._children[current]))
        return tuple(found)

    def is_subtype(self, sub: TypeRef, sup: TypeRef) -> bool:
        if sub == sup:
            if sub.is_class:
                self.class_decl(sub.class_name)
            return True
        if sub.kind is TypeKind.UNIT:
            return True
        if sup.kind is TypeKind.CLASS:
            if sub.kind is TypeKind.NULL:
                self.class_decl(sup.class_name)
                return True
            if sub.kind is TypeKind.CLASS:
                return self.is_subclass(sub.class_name, sup.class_name)
        return False

    def lub_class(self, names: Iterable[str]) -> str:
        """Least common superclass of a non-empty set of class names."""

        names = list(names)
        if not names:
            raise ValueError("lub_class requires at least one class name.")
        for candidate in self.superclasses(names[0]):
            if all(self.is_subclass(other, candidate) for other in names[1:]):
                return candidate
        return OBJECT

    def resolve_method(self, name: str, method: str) -> tuple[str, MethodDecl]:
        """Bottom-up lookup of ``method`` starting at class ``name``."""

        for owner in self.superclasses(name):
            decl = self._classes[owner].find_method(method)
            if decl is not None:
                return owner, decl
        raise MethodNotFoundError(f"Method {method!r} not found from class {name!r}.")

    def field_table_domain(self, name: str) -> tuple[FieldSlot, ...]:
        self.class_decl(name)
        return self._field_domains[name]

    def field_slot(self, owner: str, field: str) -> FieldSlot:
        """The slot for a ``(defining class, field name)`` reference."""

        decl = self.class_decl(owner).find_field(field)
        if decl is None:
            raise ProgramError(f"Class {owner!r} declares no field {field!r}.")
        return FieldSlot(owner, decl.name, decl.type)

    def methods(self) -> Iterator[tuple[str, MethodDecl]]:
        for decl in self._classes.values():
            for method in decl.methods:
                yield decl.name, method

    def method_declarations(self, method: str) -> list[tuple[str, MethodDecl]]:
        return [(owner, decl) for owner, decl in self.methods() if decl.name == method]

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _walk_up(self, name: str) -> tuple[str, ...]:
        chain: list[str] = []
        current: str | None = name
        while current is not None:
            if current in chain:
                raise ProgramError(f"Cyclic class hierarchy through {current!r}.")
            chain.append(current)
            current = self._classes[current].superclass
        return tuple(chain)

    def _build_domain(self, name: str) -> tuple[FieldSlot, ...]:
        slots: list[FieldSlot] = []
        for owner in reversed(self._ancestors[name]):
            for field in self._classes[owner].fields:
                slots.append(FieldSlot(owner, field.name, field.type))
        return tuple(slots)

    @staticmethod
    def _check_members(decl: ClassDecl) -> None:
        seen_fields: set[str] = set()
        for field in decl.fields:
            if field.name in seen_fields:
                raise ProgramError(f"Duplicate field {decl.name}.{field.name}.")
            seen_fields.add(field.name)
        seen_methods: set[str] = set()
        for method in decl.methods:
            if method.name in seen_methods:
                raise ProgramError(f"Duplicate method {decl.name}.{method.name}.")
            seen_methods.add(method.name)
