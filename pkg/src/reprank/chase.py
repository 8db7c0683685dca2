"""Bounded restricted chase and query answering for linear/guarded TGDs."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

from reprank.syntax import (
    CQ,
    EGD,
    TGD,
    Atom,
    Constant,
    NegativeConstraint,
    Null,
    Ontology,
    Term,
    TGDClass,
    Variable,
    classify_tgd,
)

log = logging.getLogger(__name__)

Substitution = dict[Term, Term]


class UnsupportedTGDError(ValueError):
    """Raised when a TGD is neither linear nor guarded."""


class InconsistentKBError(RuntimeError):
    def __init__(self, result: "ConsistencyResult"):
        self.result = result
        super().__init__(f"knowledge base is inconsistent: {result.describe()}")


class ChaseInstance:
    """Atoms of a chase prefix, each tagged with its derivation level.

    Treat instances returned by the public functions as read-only.
    """

    def __init__(self) -> None:
        self.levels: dict[Atom, int] = {}
        self.by_pred: dict[str, list[Atom]] = {}
        self.by_arg: dict[tuple[str, int, Term], list[Atom]] = {}
        self.frontier: list[Atom] = []
        self.level = 0
        self.next_null = 1
        self.saturated = False

    @classmethod
    def from_database(cls, database: Iterable[Atom]) -> ChaseInstance:
        inst = cls()
        for atom in sorted(database, key=Atom.sort_key):
            inst._add(atom, 0)
        inst.frontier = list(inst.levels)
        return inst

    def copy(self) -> ChaseInstance:
        other = ChaseInstance()
        other.levels = dict(self.levels)
        other.by_pred = {k: list(v) for k, v in self.by_pred.items()}
        other.by_arg = {k: list(v) for k, v in self.by_arg.items()}
        other.frontier = list(self.frontier)
        other.level = self.level
        other.next_null = self.next_null
        other.saturated = self.saturated
        return other

    def _add(self, atom: Atom, level: int) -> None:
        self.levels[atom] = level
        self.by_pred.setdefault(atom.predicate, []).append(atom)
        for i, t in enumerate(atom.args):
            self.by_arg.setdefault((atom.predicate, i, t), []).append(atom)

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.levels

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.levels)

    @property
    def atoms(self) -> set[Atom]:
        return set(self.levels)

    def level_of(self, atom: Atom) -> int:
        return self.levels[atom]

    def candidates(self, atom: Atom, sub: Substitution) -> list[Atom]:
        best: Optional[list[Atom]] = None
        for i, t in enumerate(atom.args):
            if type(t) is Variable:
                t = sub.get(t)
                if t is None:
                    continue
            hits = self.by_arg.get((atom.predicate, i, t), [])
            if best is None or len(hits) < len(best):
                best = hits
                if not best:
                    break
        if best is None:
            best = self.by_pred.get(atom.predicate, [])
        return best


def _unify(pattern: Atom, fact: Atom, sub: Substitution) -> Optional[Substitution]:
    """Extend ``sub`` so that ``pattern`` maps onto ``fact``; None if impossible."""
    if pattern.predicate != fact.predicate or len(pattern.args) != len(fact.args):
        return None
    out = sub
    copied = False
    for p, f in zip(pattern.args, fact.args):
        if type(p) is Variable:
            bound = out.get(p)
            if bound is None:
                if not copied:
                    out = dict(out)
                    copied = True
                out[p] = f
            elif bound != f:
                return None
        elif p != f:
            return None
    return out


def homomorphisms(
    atoms: Sequence[Atom],
    inst: ChaseInstance,
    sub: Optional[Substitution] = None,
    max_level: Optional[int] = None,
) -> Iterator[Substitution]:
    """All extensions of ``sub`` mapping every atom of ``atoms`` into ``inst``."""
    sub = {} if sub is None else sub
    if not atoms:
        yield sub
        return
    first, rest = atoms[0], atoms[1:]
    for fact in inst.candidates(first, sub):
        if max_level is not None and inst.levels[fact] > max_level:
            continue
        ext = _unify(first, fact, sub)
        if ext is not None:
            yield from homomorphisms(rest, inst, ext, max_level)


def _require_supported(tgds: Iterable[TGD]) -> None:
    for tgd in tgds:
        if classify_tgd(tgd) is TGDClass.NEITHER:
            raise UnsupportedTGDError(
                f"TGD {tgd.name or tgd} is neither linear nor guarded; the chase only "
                "supports linear and guarded TGD sets"
            )


def _head_satisfied(head: Atom, sub: Substitution, inst: ChaseInstance) -> bool:
    """Restricted-chase test: does some atom already match the head image?"""
    image = head.substitute(sub)
    if image.args and all(type(t) is not Variable for t in image.args):
        return image in inst
    for fact in inst.candidates(image, {}):
        if _unify(image, fact, {}) is not None:
            return True
    return False


def _triggers(inst: ChaseInstance, tgds: Sequence[TGD]) -> list[tuple[tuple, int, Substitution]]:
    """Body homomorphisms whose image peaks at the current frontier level."""
    top = inst.level
    frontier = inst.frontier
    found = []
    for ti, tgd in enumerate(tgds):
        body = tgd.body
        for j, pivot in enumerate(body):
            others = body[:j] + body[j + 1:]
            for fact in frontier:
                if fact.predicate != pivot.predicate:
                    continue
                sub = _unify(pivot, fact, {})
                if sub is None:
                    continue
                for hom in homomorphisms(others, inst, sub, max_level=top):
                    # Semi-naive split: earlier body atoms must sit strictly below the
                    # frontier so each homomorphism is produced for one pivot only.
                    if any(inst.levels[b.substitute(hom)] >= top for b in body[:j]):
                        continue
                    key = tuple(b.substitute(hom).sort_key() for b in body)
                    found.append(((ti, key), ti, hom))
    found.sort(key=lambda item: item[0])
    return found


def _step_in_place(inst: ChaseInstance, tgds: Sequence[TGD]) -> bool:
    if inst.saturated:
        return False
    new_level = inst.level + 1
    added: list[Atom] = []
    for _, ti, hom in _triggers(inst, tgds):
        tgd = tgds[ti]
        if _head_satisfied(tgd.head, hom, inst):
            continue
        sub = dict(hom)
        for v in tgd.existential_vars:
            sub[v] = Null(inst.next_null)
            inst.next_null += 1
        atom = tgd.head.substitute(sub)
        inst._add(atom, new_level)
        added.append(atom)
    if not added:
        inst.saturated = True
        return False
    inst.level = new_level
    inst.frontier = added
    return True


def chase_step(inst: ChaseInstance, tgds: Sequence[TGD]) -> ChaseInstance:
    """One breadth-first level of the restricted chase, on a copy of ``inst``."""
    _require_supported(tgds)
    out = inst.copy()
    _step_in_place(out, tgds)
    return out


def chase_to_level(kb: Ontology, k: int) -> ChaseInstance:
    """``chase^k(D, Σ)``, stopping early at a fixpoint."""
    if k < 0:
        raise ValueError("chase level must be nonnegative")
    _require_supported(kb.tgds)
    inst = ChaseInstance.from_database(kb.database)
    for _ in range(k):
        if not _step_in_place(inst, kb.tgds):
            break
    return inst


def default_depth_constant(kb: Ontology) -> int:
    """Per-query-atom chase depth used when none is configured.

    ``|R| * (2w + c)^w`` with ``R`` the predicates, ``w`` the maximal arity and
    ``c`` the number of constants occurring in the TGDs: the number of atom
    shapes up to renaming of nulls, which bounds the length of a derivation
    path that never revisits a shape.
    """
    if not kb.tgds:
        return 1
    preds = {a.predicate for t in kb.tgds for a in (*t.body, t.head)}
    width = max(kb.schema[p] for p in preds)
    consts = {x for t in kb.tgds for a in (*t.body, t.head) for x in a.args if type(x) is Constant}
    return max(1, len(preds) * (2 * width + len(consts)) ** width)


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    violated: Union[NegativeConstraint, EGD, None] = None
    witness: tuple[Atom, ...] = ()

    def describe(self) -> str:
        if self.consistent:
            return "consistent"
        kind = "constraint" if isinstance(self.violated, NegativeConstraint) else "EGD"
        atoms = ", ".join(str(a) for a in self.witness)
        return f"violated {kind} {self.violated.name}: {self.violated} (on {atoms})"


def _apply_egds(atoms: set[Atom], egds: Sequence[EGD]) -> tuple[set[Atom], Optional[tuple[EGD, tuple[Atom, ...]]]]:
    """Run the EGD chase rule to a fixpoint; report a hard constant clash."""
    current = set(atoms)
    while True:
        inst = ChaseInstance.from_database(())
        for a in sorted(current, key=Atom.sort_key):
            inst._add(a, 0)
        change: Optional[tuple[Term, Term]] = None
        for egd in egds:
            for hom in homomorphisms(egd.body, inst):
                left, right = hom[egd.left], hom[egd.right]
                if left == right:
                    continue
                if type(left) is Constant and type(right) is Constant:
                    return current, (egd, tuple(b.substitute(hom) for b in egd.body))
                if type(left) is Null and (type(right) is Constant or right.sort_key() < left.sort_key()):
                    change = (left, right)
                else:
                    change = (right, left)
                break
            if change:
                break
        if change is None:
            return current, None
        old, new = change
        current = {a.substitute({old: new}) for a in current}


class Reasoner:
    """Query answering over one knowledge base, caching the chase prefix."""

    def __init__(self, kb: Ontology, depth_constant: Optional[int] = None):
        _require_supported(kb.tgds)
        self.kb = kb
        self.depth_constant = depth_constant or default_depth_constant(kb)
        self._inst = ChaseInstance.from_database(kb.database)
        self._consistency: Optional[ConsistencyResult] = None

    def chase(self, level: int) -> ChaseInstance:
        """The chase up to ``level``; later calls extend the cached prefix."""
        while self._inst.level < level and not self._inst.saturated:
            _step_in_place(self._inst, self.kb.tgds)
        if self._inst.level > level:
            return chase_to_level(self.kb, level)
        return self._inst

    def depth_for(self, n_atoms: int) -> int:
        return self.depth_constant * max(1, n_atoms)

    def consistency(self) -> ConsistencyResult:
        if self._consistency is None:
            self._consistency = self._check()
        return self._consistency

    def _check(self) -> ConsistencyResult:
        sizes = [len(r.body) for r in (*self.kb.ncs, *self.kb.egds)]
        if not sizes:
            return ConsistencyResult(True)
        inst = self.chase(self.depth_for(max(sizes)))
        atoms, clash = _apply_egds(inst.atoms, self.kb.egds)
        if clash is not None:
            return ConsistencyResult(False, clash[0], clash[1])
        merged = ChaseInstance.from_database(())
        for a in sorted(atoms, key=Atom.sort_key):
            merged._add(a, 0)
        for nc in self.kb.ncs:
            for hom in homomorphisms(nc.body, merged):
                return ConsistencyResult(False, nc, tuple(b.substitute(hom) for b in nc.body))
        return ConsistencyResult(True)

    def answer(self, query: CQ) -> set[tuple[Constant, ...]]:
        result = self.consistency()
        if not result.consistent:
            raise InconsistentKBError(result)
        inst = self.chase(self.depth_for(len(query.atoms)))
        out = set()
        for hom in homomorphisms(query.atoms, inst):
            tup = tuple(hom[v] for v in query.free)
            if all(type(t) is Constant for t in tup):
                out.add(tup)
        return out

    def answers_in_atom_form(self, query: CQ) -> set[Atom]:
        atom = query.distinguished
        if atom is None:
            raise ValueError(f"query is not simple: {query}")
        return {Atom(atom.predicate, tup) for tup in self.answer(query)}

    def entails(self, atom: Atom) -> bool:
        if not atom.is_ground():
            raise ValueError(f"entailment is defined for ground atoms, got {atom}")
        return atom in self.chase(self.depth_for(1))


KBLike = Union[Ontology, Reasoner]


def as_reasoner(kb: KBLike) -> Reasoner:
    return kb if isinstance(kb, Reasoner) else Reasoner(kb)


def answer_cq(query: CQ, kb: KBLike) -> set[tuple[Constant, ...]]:
    return as_reasoner(kb).answer(query)


def answers_in_atom_form(query: CQ, kb: KBLike) -> set[Atom]:
    return as_reasoner(kb).answers_in_atom_form(query)


def check_consistency(kb: KBLike) -> ConsistencyResult:
    return as_reasoner(kb).consistency()


def entails(kb: KBLike, atom: Atom) -> bool:
    return as_reasoner(kb).entails(atom)


def format_instance(inst: ChaseInstance) -> str:
    """Chase dump in the source format, nulls written as ``_:n<k>``."""
    lines = []
    by_level: dict[int, list[Atom]] = {}
    for atom, level in inst.levels.items():
        by_level.setdefault(level, []).append(atom)
    for level in sorted(by_level):
        lines.append(f"% level {level}")
        lines.extend(f"{a}." for a in sorted(by_level[level], key=Atom.sort_key))
    return "\n".join(lines) + "\n"
