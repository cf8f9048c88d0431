"""Signatures, ground terms, atomic and quantifier-free sentences.

Provides the textual formats (signature files, sentence grammar), canonical
printing, the sentence length measure, and deterministic bounded enumeration
of terms and atomic sentences.

Length convention: the length of a term is its number of symbol occurrences;
an equation ``s = t`` has length ``len(s) + len(t) + 1`` and a relation atom
``R(t1, ..., tn)`` has length ``1 + sum(len(ti))``.  With this convention the
set of atomic sentences of each length is finite exactly when the signature
is locally finite.

Canonical order: terms are ordered by (length, preorder symbol sequence);
atomic sentences by (length, kind, ...) with equations before relation atoms
at equal length, equations compared by (lhs sequence, rhs sequence) and
relation atoms by (symbol, argument sequences).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import NotLocallyFinite, ParseError

OMEGA = "omega"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class Family:
    """A named family of symbols: a single symbol, ``base_0..base_{n-1}``,
    or the countably indexed ``base_0, base_1, ...`` when index is OMEGA."""

    kind: str  # "const" | "fn" | "rel"
    base: str
    arity: int
    index: int | str | None = None

    def __post_init__(self):
        if self.kind not in ("const", "fn", "rel"):
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if not _NAME_RE.fullmatch(self.base):
            raise ValueError(f"invalid symbol name {self.base!r}")
        if self.kind == "const" and self.arity != 0:
            raise ValueError(f"constant family {self.base!r} must have arity 0")
        if self.kind in ("fn", "rel") and self.arity < 1:
            raise ValueError(f"{self.kind} family {self.base!r} must have arity >= 1")
        if not (self.index is None or self.index == OMEGA
                or (isinstance(self.index, int) and self.index >= 1)):
            raise ValueError(f"family {self.base!r} has invalid index {self.index!r}")

    @property
    def is_infinite(self) -> bool:
        return self.index == OMEGA

    def names(self, cutoff: int | None = None) -> Iterator[str]:
        if self.index is None:
            yield self.base
        elif self.index == OMEGA:
            if cutoff is None:
                raise NotLocallyFinite(
                    f"family {self.base!r} is countably indexed; supply an index cutoff")
            for i in range(cutoff):
                yield f"{self.base}_{i}"
        else:
            for i in range(self.index):
                yield f"{self.base}_{i}"


@dataclass(frozen=True)
class Signature:
    families: tuple[Family, ...]

    def __post_init__(self):
        concrete: dict[str, Family] = {}
        omega: dict[str, Family] = {}
        has_const = False
        for fam in self.families:
            if fam.kind == "const":
                has_const = True
            if fam.is_infinite:
                if fam.base in omega or fam.base in concrete:
                    raise ValueError(f"duplicate symbol name {fam.base!r}")
                omega[fam.base] = fam
            else:
                for name in fam.names():
                    if name in concrete or name in omega:
                        raise ValueError(f"duplicate symbol name {name!r}")
                    concrete[name] = fam
        if not has_const:
            raise ValueError("signature must contain at least one constant symbol")
        for name in concrete:
            for base in omega:
                if name.startswith(base + "_") and name[len(base) + 1:].isdigit():
                    raise ValueError(
                        f"symbol {name!r} collides with indexed family {base!r}")
        object.__setattr__(self, "_concrete", concrete)
        object.__setattr__(self, "_omega", omega)

    def resolve(self, name: str) -> tuple[str, int] | None:
        """Kind and arity of a symbol name, or None if it is not declared."""
        fam = self._concrete.get(name)
        if fam is not None:
            return (fam.kind, fam.arity)
        for base, ofam in self._omega.items():
            if name.startswith(base + "_"):
                suffix = name[len(base) + 1:]
                if suffix.isdigit() and str(int(suffix)) == suffix:
                    return (ofam.kind, ofam.arity)
        return None

    def is_locally_finite(self) -> bool:
        return not self._omega

    def symbols(self, kind: str, cutoff: int | None = None) -> list[tuple[str, int]]:
        """All (name, arity) of the given kind, sorted by name.  Countably
        indexed families require a cutoff."""
        out = []
        for fam in self.families:
            if fam.kind != kind:
                continue
            for name in fam.names(cutoff):
                out.append((name, fam.arity))
        out.sort()
        return out

    def symbol_table(self, cutoff: int | None = None) -> dict[str, tuple[str, int]]:
        table = {}
        for kind in ("const", "fn", "rel"):
            for name, arity in self.symbols(kind, cutoff):
                table[name] = (kind, arity)
        return table


def same_symbols(a: Signature, b: Signature) -> bool:
    """Whether two signatures declare the same symbols (family packaging may
    differ, e.g. ``a[2]`` versus the two singles ``a_0`` and ``a_1``)."""
    if a.is_locally_finite() and b.is_locally_finite():
        return a.symbol_table() == b.symbol_table()
    norm = lambda s: sorted((f.kind, f.base, f.arity, str(f.index)) for f in s.families)
    return norm(a) == norm(b)


def is_locally_finite(sig: Signature) -> bool:
    return sig.is_locally_finite()


# ---------------------------------------------------------------------------
# terms and sentences


@dataclass(frozen=True)
class Term:
    head: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Rel:
    sym: str
    args: tuple[Term, ...]


Atomic = Union[Eq, Rel]


@dataclass(frozen=True)
class And:
    lhs: "QFSentence"
    rhs: "QFSentence"


@dataclass(frozen=True)
class Or:
    lhs: "QFSentence"
    rhs: "QFSentence"


@dataclass(frozen=True)
class Not:
    child: "QFSentence"


QFSentence = Union[Eq, Rel, And, Or, Not]


def term_length(t: Term) -> int:
    return 1 + sum(term_length(a) for a in t.args)


def atom_length(a: Atomic) -> int:
    if isinstance(a, Eq):
        return term_length(a.lhs) + term_length(a.rhs) + 1
    return 1 + sum(term_length(t) for t in a.args)


def symbol_seq(t: Term) -> tuple[str, ...]:
    """Preorder sequence of symbol names, the lexicographic sort key."""
    out: list[str] = []
    stack = [t]
    while stack:
        node = stack.pop()
        out.append(node.head)
        stack.extend(reversed(node.args))
    return tuple(out)


def term_sort_key(t: Term):
    return (term_length(t), symbol_seq(t))


def atom_sort_key(a: Atomic):
    if isinstance(a, Eq):
        return (atom_length(a), 0, symbol_seq(a.lhs), symbol_seq(a.rhs))
    return (atom_length(a), 1, a.sym, tuple(symbol_seq(t) for t in a.args))


def validate_term(sig: Signature, t: Term) -> None:
    info = sig.resolve(t.head)
    if info is None:
        raise ValueError(f"unknown symbol {t.head!r}")
    kind, arity = info
    if kind == "rel":
        raise ValueError(f"relation symbol {t.head!r} used inside a term")
    if len(t.args) != arity:
        raise ValueError(f"symbol {t.head!r} expects {arity} arguments, got {len(t.args)}")
    for a in t.args:
        validate_term(sig, a)


def validate_atom(sig: Signature, a: Atomic) -> None:
    if isinstance(a, Eq):
        validate_term(sig, a.lhs)
        validate_term(sig, a.rhs)
        return
    info = sig.resolve(a.sym)
    if info is None:
        raise ValueError(f"unknown symbol {a.sym!r}")
    kind, arity = info
    if kind != "rel":
        raise ValueError(f"{a.sym!r} is not a relation symbol")
    if len(a.args) != arity:
        raise ValueError(f"relation {a.sym!r} expects {arity} arguments, got {len(a.args)}")
    for t in a.args:
        validate_term(sig, t)


def validate_sentence(sig: Signature, phi: QFSentence) -> None:
    if isinstance(phi, (Eq, Rel)):
        validate_atom(sig, phi)
    elif isinstance(phi, Not):
        validate_sentence(sig, phi.child)
    else:
        validate_sentence(sig, phi.lhs)
        validate_sentence(sig, phi.rhs)


def atoms_of(phi: QFSentence) -> Iterator[Atomic]:
    if isinstance(phi, (Eq, Rel)):
        yield phi
    elif isinstance(phi, Not):
        yield from atoms_of(phi.child)
    else:
        yield from atoms_of(phi.lhs)
        yield from atoms_of(phi.rhs)


# ---------------------------------------------------------------------------
# printing


def print_term(t: Term) -> str:
    if not t.args:
        return t.head
    return f"{t.head}({', '.join(print_term(a) for a in t.args)})"


def print_atom(a: Atomic) -> str:
    if isinstance(a, Eq):
        return f"{print_term(a.lhs)} = {print_term(a.rhs)}"
    return f"{a.sym}({', '.join(print_term(t) for t in a.args)})"


_PREC = {Or: 1, And: 2, Not: 3}


def print_sentence(phi: QFSentence) -> str:
    def walk(node, parent_prec: int) -> str:
        if isinstance(node, (Eq, Rel)):
            return print_atom(node)
        if isinstance(node, Not):
            inner = walk(node.child, _PREC[Not])
            if isinstance(node.child, Rel):
                return f"!{inner}"
            return f"!({walk(node.child, 0)})"
        op = " & " if isinstance(node, And) else " | "
        prec = _PREC[type(node)]
        left = walk(node.lhs, prec - 1)  # left associative: same op on the left stays bare
        right = walk(node.rhs, prec)
        text = f"{left}{op}{right}"
        if prec <= parent_prec:
            return f"({text})"
        return text

    return walk(phi, 0)


def print_signature(sig: Signature) -> str:
    lines = []
    for fam in sig.families:
        idx = ""
        if fam.index == OMEGA:
            idx = "[omega]"
        elif fam.index is not None:
            idx = f"[{fam.index}]"
        if fam.kind == "const":
            lines.append(f"const {fam.base}{idx};")
        else:
            lines.append(f"{fam.kind} {fam.base}/{fam.arity}{idx};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# tokenizer


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "int" | punctuation | "eof"
    value: str
    line: int
    column: int


_PUNCT = set("()[],;=&|!/")


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            m = _NAME_RE.match(text, i)
            word = m.group()
            tokens.append(Token("name", word, line, col))
            i += len(word)
            col += len(word)
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            tokens.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.value or 'end of input'!r}",
                             tok.line, tok.column)
        return self.next()

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"


# ---------------------------------------------------------------------------
# signature parsing


def parse_family_stmt(stream: TokenStream) -> Family:
    """One ``const``/``fn``/``rel`` statement, the keyword already peeked."""
    kw = stream.expect("name")
    if kw.value not in ("const", "fn", "rel"):
        raise ParseError(f"expected 'const', 'fn' or 'rel', found {kw.value!r}",
                         kw.line, kw.column)
    name = stream.expect("name")
    arity = 0
    if kw.value in ("fn", "rel"):
        stream.expect("/")
        tok = stream.expect("int")
        arity = int(tok.value)
        if arity < 1:
            raise ParseError(f"{kw.value} arity must be >= 1", tok.line, tok.column)
    index: int | str | None = None
    if stream.peek().kind == "[":
        stream.next()
        tok = stream.peek()
        if tok.kind == "name" and tok.value == OMEGA:
            stream.next()
            index = OMEGA
        else:
            tok = stream.expect("int")
            index = int(tok.value)
            if index < 1:
                raise ParseError("family index must be >= 1 or omega", tok.line, tok.column)
        stream.expect("]")
    stream.expect(";")
    try:
        return Family(kw.value, name.value, arity, index)
    except ValueError as e:
        raise ParseError(str(e), name.line, name.column) from None


def parse_signature(text: str) -> Signature:
    stream = TokenStream(tokenize(text))
    families = []
    while not stream.at_eof():
        families.append(parse_family_stmt(stream))
    tok = stream.peek()
    try:
        return Signature(tuple(families))
    except ValueError as e:
        raise ParseError(str(e), tok.line, tok.column) from None


# ---------------------------------------------------------------------------
# sentence parsing


class SentenceParser:
    def __init__(self, stream: TokenStream, sig: Signature):
        self.stream = stream
        self.sig = sig

    def parse_sentence(self) -> QFSentence:
        node = self._conj()
        while self.stream.peek().kind == "|":
            self.stream.next()
            node = Or(node, self._conj())
        return node

    def _conj(self) -> QFSentence:
        node = self._unary()
        while self.stream.peek().kind == "&":
            self.stream.next()
            node = And(node, self._unary())
        return node

    def _unary(self) -> QFSentence:
        tok = self.stream.peek()
        if tok.kind == "!":
            self.stream.next()
            return Not(self._unary())
        if tok.kind == "(":
            self.stream.next()
            node = self.parse_sentence()
            self.stream.expect(")")
            return node
        return self.parse_atom()

    def parse_atom(self) -> Atomic:
        tok = self.stream.peek()
        if tok.kind != "name":
            raise ParseError(f"expected an atomic sentence, found {tok.value or 'end of input'!r}",
                             tok.line, tok.column)
        info = self.sig.resolve(tok.value)
        if info is None:
            raise ParseError(f"unknown symbol {tok.value!r}", tok.line, tok.column)
        if info[0] == "rel":
            head = self.stream.next()
            args = self._arg_list()
            if len(args) != info[1]:
                raise ParseError(
                    f"relation {head.value!r} expects {info[1]} arguments, got {len(args)}",
                    head.line, head.column)
            return Rel(head.value, tuple(args))
        lhs = self._term()
        self.stream.expect("=")
        rhs = self._term()
        return Eq(lhs, rhs)

    def _term(self) -> Term:
        tok = self.stream.expect("name")
        info = self.sig.resolve(tok.value)
        if info is None:
            raise ParseError(f"unknown symbol {tok.value!r}", tok.line, tok.column)
        kind, arity = info
        if kind == "rel":
            raise ParseError(f"relation symbol {tok.value!r} used inside a term",
                             tok.line, tok.column)
        if kind == "const":
            return Term(tok.value)
        args = self._arg_list()
        if len(args) != arity:
            raise ParseError(f"symbol {tok.value!r} expects {arity} arguments, got {len(args)}",
                             tok.line, tok.column)
        return Term(tok.value, tuple(args))

    def _arg_list(self) -> list[Term]:
        self.stream.expect("(")
        args = [self._term()]
        while self.stream.peek().kind == ",":
            self.stream.next()
            args.append(self._term())
        self.stream.expect(")")
        return args


def parse_sentence(text: str, sig: Signature) -> QFSentence:
    stream = TokenStream(tokenize(text))
    node = SentenceParser(stream, sig).parse_sentence()
    tok = stream.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.column)
    return node


def parse_atom(text: str, sig: Signature) -> Atomic:
    stream = TokenStream(tokenize(text))
    node = SentenceParser(stream, sig).parse_atom()
    tok = stream.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.column)
    return node


def parse_term(text: str, sig: Signature) -> Term:
    stream = TokenStream(tokenize(text))
    node = SentenceParser(stream, sig)._term()
    tok = stream.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.column)
    return node


# ---------------------------------------------------------------------------
# enumeration


def _compositions(total: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered k-tuples of positive integers summing to total."""
    if k == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - k + 2):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def terms_by_length(sig: Signature, max_length: int,
                    cutoff: int | None = None) -> list[list[Term]]:
    """Lists of all ground terms of each exact length up to max_length, each
    level sorted canonically.  Index 0 is always empty."""
    if not sig.is_locally_finite() and cutoff is None:
        raise NotLocallyFinite(
            "signature has countably indexed families; supply an index cutoff")
    consts = sig.symbols("const", cutoff)
    fns = sig.symbols("fn", cutoff)
    levels: list[list[Term]] = [[] for _ in range(max_length + 1)]
    if max_length >= 1:
        levels[1] = [Term(name) for name, _ in consts]
    for length in range(2, max_length + 1):
        out = []
        for name, arity in fns:
            for comp in _compositions(length - 1, arity):
                pools = [levels[c] for c in comp]
                if any(not p for p in pools):
                    continue
                for args in itertools.product(*pools):
                    out.append(Term(name, args))
        out.sort(key=symbol_seq)
        levels[length] = out
    return levels


def enumerate_terms(sig: Signature, m: int, cutoff: int | None = None) -> list[Term]:
    """All ground terms of length <= m in canonical order."""
    levels = terms_by_length(sig, m, cutoff)
    return [t for level in levels for t in level]


def atoms_by_length(sig: Signature, max_length: int,
                    cutoff: int | None = None) -> list[list[Atomic]]:
    """Lists of all atomic sentences of each exact length up to max_length,
    each level in canonical order (equations before relation atoms)."""
    if not sig.is_locally_finite() and cutoff is None:
        raise NotLocallyFinite(
            "signature has countably indexed families; supply an index cutoff")
    term_levels = terms_by_length(sig, max(max_length - 2, 0), cutoff)
    rels = sig.symbols("rel", cutoff)
    levels: list[list[Atomic]] = [[] for _ in range(max_length + 1)]
    for length in range(2, max_length + 1):
        eqs: list[Eq] = []
        for a in range(1, length - 1):
            b = length - 1 - a
            if b < 1 or a >= len(term_levels) or b >= len(term_levels):
                continue
            for s in term_levels[a]:
                for t in term_levels[b]:
                    eqs.append(Eq(s, t))
        eqs.sort(key=lambda e: (symbol_seq(e.lhs), symbol_seq(e.rhs)))
        rel_atoms: list[Rel] = []
        for name, arity in rels:
            for comp in _compositions(length - 1, arity):
                pools = [term_levels[c] if c < len(term_levels) else [] for c in comp]
                if any(not p for p in pools):
                    continue
                for args in itertools.product(*pools):
                    rel_atoms.append(Rel(name, args))
        rel_atoms.sort(key=lambda r: (r.sym, tuple(symbol_seq(t) for t in r.args)))
        levels[length] = list(eqs) + list(rel_atoms)
    return levels


def enumerate_atomic(sig: Signature, m: int, cutoff: int | None = None) -> list[Atomic]:
    """All atomic sentences of length <= m in canonical order.  The result is
    a prefix of the enumeration for any larger bound."""
    levels = atoms_by_length(sig, m, cutoff)
    return [a for level in levels for a in level]
