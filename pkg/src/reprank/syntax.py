"""Logical syntax: terms, atoms, dependencies, queries and the knowledge base."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

_BARE_CONSTANT = re.compile(r"^(?:[a-z][A-Za-z0-9_]*|-?\d+(?:\.\d+)?)$")


@dataclass(frozen=True, slots=True)
class Constant:
    name: str

    def sort_key(self) -> tuple:
        return (0, self.name, 0)

    def __str__(self) -> str:
        if _BARE_CONSTANT.match(self.name):
            return self.name
        escaped = self.name.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'


@dataclass(frozen=True, slots=True)
class Null:
    """Labeled null; ordinals follow creation order and sort after constants."""

    ordinal: int

    def sort_key(self) -> tuple:
        return (1, "", self.ordinal)

    def __str__(self) -> str:
        return f"_:n{self.ordinal}"


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def sort_key(self) -> tuple:
        return (2, self.name, 0)

    def __str__(self) -> str:
        return self.name


Term = Union[Constant, Null, Variable]


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return all(type(t) is Constant for t in self.args)

    def has_nulls(self) -> bool:
        return any(type(t) is Null for t in self.args)

    def variables(self) -> list[Variable]:
        seen: dict[Variable, None] = {}
        for t in self.args:
            if type(t) is Variable:
                seen.setdefault(t)
        return list(seen)

    def substitute(self, mapping: Mapping[Term, Term]) -> Atom:
        return Atom(self.predicate, tuple(mapping.get(t, t) for t in self.args))

    def sort_key(self) -> tuple:
        return (self.predicate, tuple(t.sort_key() for t in self.args))

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(str(t) for t in self.args)})"


def variables_of(atoms: Iterable[Atom]) -> list[Variable]:
    seen: dict[Variable, None] = {}
    for atom in atoms:
        for v in atom.variables():
            seen.setdefault(v)
    return list(seen)


class TGDClass(enum.Enum):
    LINEAR = "linear"
    GUARDED = "guarded"
    NEITHER = "neither"


def _check_no_nulls(atoms: Iterable[Atom], what: str) -> None:
    for atom in atoms:
        if atom.has_nulls():
            raise ValueError(f"{what} must not contain labeled nulls: {atom}")


@dataclass(frozen=True)
class TGD:
    """Single-head tuple-generating dependency ``body -> exists Z head``."""

    body: tuple[Atom, ...]
    head: Atom
    name: str = ""

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError("TGD body must be nonempty")
        _check_no_nulls((*self.body, self.head), "TGD")

    @property
    def universal_vars(self) -> list[Variable]:
        return variables_of(self.body)

    @property
    def existential_vars(self) -> list[Variable]:
        body_vars = set(self.universal_vars)
        return [v for v in self.head.variables() if v not in body_vars]

    @property
    def frontier(self) -> list[Variable]:
        body_vars = set(self.universal_vars)
        return [v for v in self.head.variables() if v in body_vars]

    def guard(self) -> Optional[Atom]:
        """Leftmost body atom holding every universally quantified variable."""
        needed = set(self.universal_vars)
        for atom in self.body:
            if needed <= set(atom.variables()):
                return atom
        return None

    def __str__(self) -> str:
        body = ", ".join(str(a) for a in self.body)
        ex = self.existential_vars
        prefix = f"exists {','.join(str(v) for v in ex)} " if ex else ""
        return f"{body} -> {prefix}{self.head}"


def classify_tgd(tgd: TGD) -> TGDClass:
    if len(tgd.body) == 1:
        return TGDClass.LINEAR
    if tgd.guard() is not None:
        return TGDClass.GUARDED
    return TGDClass.NEITHER


@dataclass(frozen=True)
class NegativeConstraint:
    body: tuple[Atom, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError("constraint body must be nonempty")
        _check_no_nulls(self.body, "negative constraint")

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.body) + " -> false"


@dataclass(frozen=True)
class EGD:
    body: tuple[Atom, ...]
    left: Variable
    right: Variable
    name: str = ""

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError("EGD body must be nonempty")
        _check_no_nulls(self.body, "EGD")
        body_vars = set(variables_of(self.body))
        if self.left not in body_vars or self.right not in body_vars:
            raise ValueError(f"EGD equality variables must occur in the body: {self}")

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.body) + f" -> {self.left} = {self.right}"


@dataclass(frozen=True)
class Ontology:
    """A Datalog+/- knowledge base: database, TGDs, EGDs, constraints, schema.

    ``features`` maps a predicate to its ordered feature tuple; predicates
    without declared features map to the empty tuple.
    """

    database: frozenset[Atom] = frozenset()
    tgds: tuple[TGD, ...] = ()
    egds: tuple[EGD, ...] = ()
    ncs: tuple[NegativeConstraint, ...] = ()
    schema: Mapping[str, int] = field(default_factory=dict)
    features: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for atom in self.database:
            if not atom.is_ground():
                raise ValueError(f"database atom is not ground: {atom}")
        for atom in self.all_atoms():
            arity = self.schema.get(atom.predicate)
            if arity is None:
                raise ValueError(f"predicate {atom.predicate!r} is not in the schema")
            if arity != atom.arity:
                raise ValueError(
                    f"arity mismatch for {atom.predicate}: declared {arity}, used {atom.arity}"
                )
        for pred in self.features:
            if pred not in self.schema:
                raise ValueError(f"features declared for unknown predicate {pred!r}")

    def all_atoms(self) -> Iterator[Atom]:
        yield from self.database
        for tgd in self.tgds:
            yield from tgd.body
            yield tgd.head
        for egd in self.egds:
            yield from egd.body
        for nc in self.ncs:
            yield from nc.body

    def features_of(self, predicate: str) -> tuple[str, ...]:
        return tuple(self.features.get(predicate, ()))

    def tgd(self, name: str) -> TGD:
        for tgd in self.tgds:
            if tgd.name == name:
                return tgd
        raise KeyError(name)

    def constants(self) -> set[Constant]:
        return {t for a in self.all_atoms() for t in a.args if type(t) is Constant}


@dataclass(frozen=True)
class CQ:
    """Conjunctive query ``Q(free) = exists Y . atoms``.

    A query is *simple* when exactly one atom has the free variables, in
    order, as its whole argument list; that atom is the distinguished one.
    """

    free: tuple[Variable, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("query must contain at least one atom")
        _check_no_nulls(self.atoms, "query")
        present = set(variables_of(self.atoms))
        for v in self.free:
            if v not in present:
                raise ValueError(f"free variable {v} does not occur in the query body")

    @property
    def existential(self) -> list[Variable]:
        free = set(self.free)
        return [v for v in variables_of(self.atoms) if v not in free]

    @property
    def distinguished_index(self) -> Optional[int]:
        hits = [i for i, a in enumerate(self.atoms) if a.args == self.free]
        return hits[0] if len(hits) == 1 else None

    @property
    def distinguished(self) -> Optional[Atom]:
        i = self.distinguished_index
        return None if i is None else self.atoms[i]

    def is_simple(self) -> bool:
        return self.distinguished_index is not None

    def is_atomic(self) -> bool:
        return len(self.atoms) == 1 and not self.existential

    def __str__(self) -> str:
        head = f"Q({','.join(str(v) for v in self.free)})"
        return f"{head} = " + " & ".join(str(a) for a in self.atoms)
