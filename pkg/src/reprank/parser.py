"""Parser and printer for the ontology and query text format.

Grammar (``%`` starts a comment that runs to end of line)::

    program    := statement*
    statement  := decl | [label ":"] (fact | rule) "."
    decl       := "@pred" IDENT "/" INT ["features" "(" IDENT ("," IDENT)* ")"] "."
    fact       := atom
    rule       := conj "->" ( ["exists" VAR ("," VAR)*] atom | "false" | VAR "=" VAR )
    conj       := atom (("," | "&") atom)*
    atom       := IDENT "(" [term ("," term)*] ")"
    term       := VAR | CONST
    query      := [IDENT "(" [VAR ("," VAR)*] ")" ("=" | ":-")] ["exists" VAR ("," VAR)*] conj

Variables start with an uppercase letter or ``_``; constants are identifiers
starting with a lowercase letter, numbers, or double-quoted strings.
Unlabeled TGDs, constraints and EGDs are named ``s<i>``, ``nc<i>`` and
``egd<i>`` by their 1-based position among rules of the same kind.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional

from reprank.syntax import (
    CQ,
    EGD,
    TGD,
    Atom,
    Constant,
    NegativeConstraint,
    Ontology,
    Term,
    Variable,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"%[^\n]*"),
    ("NULL", r"_:n\d+"),
    ("ARROW", r"->"),
    ("IMPLIED", r":-"),
    ("STRING", r'"(?:[^"\\]|\\.)*"'),
    ("NUMBER", r"-?\d+(?:\.\d+)?"),
    ("IDENT", r"[^\W\d]\w*"),
    ("AT", r"@"),
    ("PUNCT", r"[(),.&=:/]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


def _is_variable_name(name: str) -> bool:
    return name[0] == "_" or name[0].isupper()


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in ("PUNCT", "ARROW", "IMPLIED", "AT") and tok.text == text

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.text == word

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}", tok)
        return self.advance()

    @staticmethod
    def error(message: str, tok: Token) -> ParseError:
        return ParseError(message, tok.line, tok.column)

    # grammar
    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "IDENT":
            self.advance()
            return Variable(tok.text) if _is_variable_name(tok.text) else Constant(tok.text)
        if tok.kind == "NUMBER":
            self.advance()
            return Constant(tok.text)
        if tok.kind == "STRING":
            self.advance()
            return Constant(re.sub(r"\\(.)", r"\1", tok.text[1:-1]))
        if tok.kind == "NULL":
            raise self.error(f"labeled nulls are not allowed in source text: {tok.text}", tok)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}", tok)

    def atom(self) -> tuple[Atom, Token]:
        name = self.expect_kind("IDENT", "a predicate name")
        self.expect("(")
        args: list[Term] = []
        if not self.at(")"):
            args.append(self.term())
            while self.at(","):
                self.advance()
                args.append(self.term())
        self.expect(")")
        return Atom(name.text, tuple(args)), name

    def conjunction(self) -> list[tuple[Atom, Token]]:
        atoms = [self.atom()]
        while self.at(",") or self.at("&"):
            self.advance()
            atoms.append(self.atom())
        return atoms

    def variable(self) -> Variable:
        tok = self.expect_kind("IDENT", "a variable")
        if not _is_variable_name(tok.text):
            raise self.error(f"expected a variable, found constant {tok.text!r}", tok)
        return Variable(tok.text)

    def variable_list(self) -> list[Variable]:
        out = [self.variable()]
        while self.at(",") and self.peek(1).kind == "IDENT" and _is_variable_name(self.peek(1).text) \
                and not self.at("(", 2):
            self.advance()
            out.append(self.variable())
        return out


class _ProgramBuilder:
    def __init__(self) -> None:
        self.schema: dict[str, int] = {}
        self.features: dict[str, tuple[str, ...]] = {}
        self.database: set[Atom] = set()
        self.tgds: list[TGD] = []
        self.ncs: list[NegativeConstraint] = []
        self.egds: list[EGD] = []
        self.used: list[tuple[Atom, Token]] = []
        self.names: set[str] = set()


def _parse_decl(p: _Parser, b: _ProgramBuilder) -> None:
    p.expect("@")
    kw = p.expect_kind("IDENT", "a directive")
    if kw.text != "pred":
        raise p.error(f"unknown directive @{kw.text}", kw)
    name = p.expect_kind("IDENT", "a predicate name")
    p.expect("/")
    arity_tok = p.expect_kind("NUMBER", "an arity")
    if not arity_tok.text.isdigit():
        raise p.error(f"arity must be a nonnegative integer, got {arity_tok.text}", arity_tok)
    arity = int(arity_tok.text)
    previous = b.schema.get(name.text)
    if previous is not None and previous != arity:
        raise p.error(f"predicate {name.text} redeclared with arity {arity} (was {previous})", name)
    b.schema[name.text] = arity
    if p.at_keyword("features"):
        p.advance()
        p.expect("(")
        feats: list[str] = []
        if not p.at(")"):
            feats.append(p.expect_kind("IDENT", "a feature name").text)
            while p.at(","):
                p.advance()
                feats.append(p.expect_kind("IDENT", "a feature name").text)
        ftok = p.expect(")")
        if len(set(feats)) != len(feats):
            raise p.error(f"duplicate feature in declaration of {name.text}", ftok)
        b.features[name.text] = tuple(feats)
    p.expect(".")


def _fresh_name(b: _ProgramBuilder, prefix: str, index: int) -> str:
    name = f"{prefix}{index}"
    while name in b.names:
        name += "'"
    return name


def _parse_statement(p: _Parser, b: _ProgramBuilder) -> None:
    label: Optional[Token] = None
    if p.peek().kind == "IDENT" and p.at(":", 1):
        label = p.advance()
        p.advance()
        if label.text in b.names:
            raise p.error(f"duplicate rule label {label.text}", label)
    start = p.peek()
    body = p.conjunction()
    b.used.extend(body)
    if not p.at("->"):
        p.expect(".")
        if label is not None:
            raise p.error("facts cannot carry labels", label)
        if len(body) != 1:
            raise p.error("a fact statement holds exactly one atom", start)
        atom, tok = body[0]
        for t in atom.args:
            if type(t) is Variable:
                raise p.error(f"variable {t} in database fact {atom}", tok)
        b.database.add(atom)
        return
    p.advance()
    body_atoms = tuple(a for a, _ in body)
    if p.at_keyword("false"):
        p.advance()
        p.expect(".")
        name = label.text if label else _fresh_name(b, "nc", len(b.ncs) + 1)
        b.ncs.append(NegativeConstraint(body_atoms, name))
        b.names.add(name)
        return
    if p.peek().kind == "IDENT" and p.at("=", 1):
        left = p.variable()
        p.expect("=")
        right = p.variable()
        end = p.expect(".")
        name = label.text if label else _fresh_name(b, "egd", len(b.egds) + 1)
        try:
            b.egds.append(EGD(body_atoms, left, right, name))
        except ValueError as exc:
            raise p.error(str(exc), end) from None
        b.names.add(name)
        return
    declared: list[Variable] = []
    if p.at_keyword("exists"):
        p.advance()
        declared = p.variable_list()
    head, head_tok = p.atom()
    b.used.append((head, head_tok))
    p.expect(".")
    name = label.text if label else _fresh_name(b, "s", len(b.tgds) + 1)
    tgd = TGD(body_atoms, head, name)
    body_vars = set(tgd.universal_vars)
    for v in declared:
        if v in body_vars:
            raise p.error(f"existential variable {v} also occurs in the body", head_tok)
        if v not in head.variables():
            raise p.error(f"existential variable {v} does not occur in the head", head_tok)
    undeclared = [v for v in tgd.existential_vars if v not in declared]
    if undeclared:
        raise p.error(
            f"head variable {undeclared[0]} is neither in the body nor declared with 'exists'",
            head_tok,
        )
    b.tgds.append(tgd)
    b.names.add(name)


def _check_schema(b: _ProgramBuilder) -> None:
    for atom, tok in b.used:
        arity = b.schema.get(atom.predicate)
        if arity is None:
            raise ParseError(f"undeclared predicate {atom.predicate!r}", tok.line, tok.column)
        if arity != atom.arity:
            raise ParseError(
                f"arity mismatch for {atom.predicate}: declared {arity}, used {atom.arity}",
                tok.line,
                tok.column,
            )


def parse_program(text: str) -> Ontology:
    """Parse ontology source text into an :class:`Ontology`."""
    p = _Parser(text)
    b = _ProgramBuilder()
    while p.peek().kind != "EOF":
        if p.at("@"):
            _parse_decl(p, b)
        else:
            _parse_statement(p, b)
    _check_schema(b)
    return Ontology(
        database=frozenset(b.database),
        tgds=tuple(b.tgds),
        egds=tuple(b.egds),
        ncs=tuple(b.ncs),
        schema=dict(b.schema),
        features=dict(b.features),
    )


def parse_query(text: str, schema: Optional[Mapping[str, int]] = None) -> CQ:
    """Parse a conjunctive query.

    Without an explicit head every variable is free, in order of first
    occurrence.
    """
    p = _Parser(text)
    free: Optional[list[Variable]] = None
    if p.peek().kind == "IDENT" and p.at("(", 1):
        # Look for ``Name(vars) =`` / ``Name(vars) :-``.
        j = 2
        while p.peek(j).kind not in ("EOF",) and not p.at(")", j):
            j += 1
        if p.at("=", j + 1) or p.at(":-", j + 1):
            p.advance()
            p.advance()
            free = []
            if not p.at(")"):
                free = p.variable_list()
            p.expect(")")
            p.advance()
    declared: list[Variable] = []
    if p.at_keyword("exists"):
        p.advance()
        declared = p.variable_list()
    body = p.conjunction()
    p.expect_kind("EOF", "end of query")
    atoms = tuple(a for a, _ in body)
    if schema is not None:
        for atom, tok in body:
            arity = schema.get(atom.predicate)
            if arity is None:
                raise ParseError(f"unknown predicate {atom.predicate!r}", tok.line, tok.column)
            if arity != atom.arity:
                raise ParseError(
                    f"arity mismatch for {atom.predicate}: declared {arity}, used {atom.arity}",
                    tok.line,
                    tok.column,
                )
    if free is None:
        seen: dict[Variable, None] = {}
        for atom in atoms:
            for v in atom.variables():
                if v not in declared:
                    seen.setdefault(v)
        free = list(seen)
    elif set(free) & set(declared):
        raise ParseError("a free variable cannot also be declared existential")
    try:
        return CQ(tuple(free), atoms)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_atom(text: str, schema: Optional[Mapping[str, int]] = None) -> Atom:
    """Parse a single atom such as ``hotel(h1)``."""
    p = _Parser(text)
    atom, tok = p.atom()
    p.expect_kind("EOF", "end of atom")
    if schema is not None:
        arity = schema.get(atom.predicate)
        if arity is None:
            raise ParseError(f"unknown predicate {atom.predicate!r}", tok.line, tok.column)
        if arity != atom.arity:
            raise ParseError(
                f"arity mismatch for {atom.predicate}: declared {arity}, used {atom.arity}",
                tok.line,
                tok.column,
            )
    return atom


def format_program(kb: Ontology) -> str:
    """Render a knowledge base in the source format; ``parse_program`` inverts it."""
    lines = []
    for pred in sorted(kb.schema):
        decl = f"@pred {pred}/{kb.schema[pred]}"
        if pred in kb.features:
            decl += f" features({','.join(kb.features[pred])})"
        lines.append(decl + ".")
    for atom in sorted(kb.database, key=Atom.sort_key):
        lines.append(f"{atom}.")
    for tgd in kb.tgds:
        lines.append(f"{tgd.name}: {tgd}.")
    for nc in kb.ncs:
        lines.append(f"{nc.name}: {nc}.")
    for egd in kb.egds:
        lines.append(f"{egd.name}: {egd}.")
    return "\n".join(lines) + ("\n" if lines else "")
