"""Ground congruence closure over a presentation.

Decides atomic sentences in finitely presented minimal structures, decides
consistency of finite sets of ground literals, and constructs the term-model
witness for consistent sets.

The closure is incremental: querying a term not yet seen extends the subterm
universe.  Adding terms never merges two previously distinct classes (only
asserted equations do), so class representatives handed out earlier stay
valid as the universe grows.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import syntax
from .errors import InconsistentLiterals
from .syntax import Atomic, Eq, Signature, Term


@dataclass(frozen=True)
class GroundLiteral:
    atom: Atomic
    positive: bool = True

    def __str__(self) -> str:
        text = syntax.print_atom(self.atom)
        return text if self.positive else f"!({text})"


@dataclass(frozen=True)
class Presentation:
    """A finite set of positive atomic sentences over a signature."""

    sig: Signature
    atoms: tuple[Atomic, ...]

    def __post_init__(self):
        for a in self.atoms:
            syntax.validate_atom(self.sig, a)

    def canonical_atoms(self) -> tuple[Atomic, ...]:
        return tuple(sorted(set(self.atoms), key=syntax.atom_sort_key))


class CongruenceClosure:
    """Union-find congruence closure on the subterm graph.

    Nodes are hash-consed: two applications with congruent arguments share a
    node, so congruence at creation time needs no propagation.  Unions keep
    the smaller node id as class representative, which makes representatives
    of settled classes stable under later term additions.
    """

    def __init__(self, sig: Signature):
        self.sig = sig
        self.version = 0
        self._term_node: dict[Term, int] = {}
        self._head: list[str] = []
        self._args: list[tuple[int, ...]] = []
        self._parent: list[int] = []
        self._uses: dict[int, list[int]] = {}
        self._sig_table: dict[tuple, int] = {}
        self._rel_facts: dict[str, list[tuple[int, ...]]] = {}
        self._rel_cache: dict[str, tuple[int, set]] = {}

    def find(self, x: int) -> int:
        parent = self._parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def add_term(self, t: Term) -> int:
        nid = self._term_node.get(t)
        if nid is not None:
            return nid
        arg_ids = tuple(self.add_term(a) for a in t.args)
        nid = self._lookup_or_create(t.head, arg_ids)
        self._term_node[t] = nid
        return nid

    def _lookup_or_create(self, head: str, arg_ids: tuple[int, ...]) -> int:
        key = (head, tuple(self.find(a) for a in arg_ids))
        hit = self._sig_table.get(key)
        if hit is not None:
            return hit
        nid = len(self._head)
        self._head.append(head)
        self._args.append(arg_ids)
        self._parent.append(nid)
        self._sig_table[key] = nid
        for root in set(key[1]):
            self._uses.setdefault(root, []).append(nid)
        return nid

    def merge(self, a: int, b: int) -> None:
        queue = [(a, b)]
        while queue:
            x, y = queue.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            keep, gone = (rx, ry) if rx < ry else (ry, rx)
            self._parent[gone] = keep
            self.version += 1
            moved = self._uses.pop(gone, [])
            for node in moved:
                key = (self._head[node], tuple(self.find(q) for q in self._args[node]))
                other = self._sig_table.get(key)
                if other is None:
                    self._sig_table[key] = node
                elif self.find(other) != self.find(node):
                    queue.append((other, node))
            if moved:
                self._uses.setdefault(keep, []).extend(moved)

    def assert_atom(self, a: Atomic) -> None:
        if isinstance(a, Eq):
            self.merge(self.add_term(a.lhs), self.add_term(a.rhs))
        else:
            ids = tuple(self.add_term(t) for t in a.args)
            self._rel_facts.setdefault(a.sym, []).append(ids)
            self._rel_cache.pop(a.sym, None)

    def entails_eq(self, s: Term, t: Term) -> bool:
        return self.find(self.add_term(s)) == self.find(self.add_term(t))

    def _rel_set(self, sym: str) -> set:
        cached = self._rel_cache.get(sym)
        if cached is not None and cached[0] == self.version:
            return cached[1]
        tuples = {tuple(self.find(i) for i in tup)
                  for tup in self._rel_facts.get(sym, ())}
        self._rel_cache[sym] = (self.version, tuples)
        return tuples

    def holds_rel(self, sym: str, arg_ids: tuple[int, ...]) -> bool:
        return tuple(self.find(i) for i in arg_ids) in self._rel_set(sym)

    def holds_atom(self, a: Atomic) -> bool:
        if isinstance(a, Eq):
            return self.entails_eq(a.lhs, a.rhs)
        ids = tuple(self.add_term(t) for t in a.args)
        return self.holds_rel(a.sym, ids)


def close(p: Presentation) -> CongruenceClosure:
    cc = CongruenceClosure(p.sig)
    for a in p.atoms:
        cc.assert_atom(a)
    return cc


def entails_eq(cc: CongruenceClosure, s: Term, t: Term) -> bool:
    return cc.entails_eq(s, t)


def holds_atom(cc: CongruenceClosure, a: Atomic) -> bool:
    return cc.holds_atom(a)


@dataclass(frozen=True)
class Consistency:
    ok: bool
    witness: Presentation | None = None
    clash: GroundLiteral | None = None


def consistent(sig: Signature, literals) -> Consistency:
    """Decide whether some minimal structure satisfies all literals.

    The positive part is closed; the set is consistent iff no negative
    equation has congruent sides and no negative relation literal's argument
    tuple is congruent to an asserted one.  The clash reported is the first
    violated negative literal in input order.
    """
    literals = list(literals)
    positives = tuple(l.atom for l in literals if l.positive)
    witness = Presentation(sig, positives)
    cc = close(witness)
    for lit in literals:
        if lit.positive:
            continue
        if cc.holds_atom(lit.atom):
            return Consistency(False, None, lit)
    return Consistency(True, witness, None)


def term_model(sig: Signature, literals):
    """The minimal model of a consistent literal set: the finitely presented
    structure on the positive part.  Raises on inconsistent input."""
    verdict = consistent(sig, literals)
    if not verdict.ok:
        raise InconsistentLiterals(f"literal set is inconsistent; clash on {verdict.clash}")
    from .structures import FinitelyPresented

    return FinitelyPresented(verdict.witness)


# ---------------------------------------------------------------------------
# presentation files: a signature block followed by ``atom <sentence>;`` lines


def parse_presentation(text: str) -> Presentation:
    stream = syntax.TokenStream(syntax.tokenize(text))
    families = []
    while stream.peek().kind == "name" and stream.peek().value in ("const", "fn", "rel"):
        families.append(syntax.parse_family_stmt(stream))
    tok = stream.peek()
    try:
        sig = Signature(tuple(families))
    except ValueError as e:
        raise syntax.ParseError(str(e), tok.line, tok.column) from None
    parser = syntax.SentenceParser(stream, sig)
    atoms = []
    while not stream.at_eof():
        kw = stream.expect("name")
        if kw.value != "atom":
            raise syntax.ParseError(
                f"expected 'atom' statement, found {kw.value!r}", kw.line, kw.column)
        atoms.append(parser.parse_atom())
        stream.expect(";")
    return Presentation(sig, tuple(atoms))


def print_presentation(p: Presentation) -> str:
    lines = [syntax.print_signature(p.sig).rstrip("\n")]
    for a in p.atoms:
        lines.append(f"atom {syntax.print_atom(a)};")
    return "\n".join(lines) + "\n"
