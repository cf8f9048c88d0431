"""Minimal-structure oracles and their backends.

A structure answers two questions: the value of a ground term (a canonical,
backend-specific handle) and the truth of an atomic sentence.  Backends:

* FiniteTable      -- explicit finite universe with total function tables;
* FinitelyPresented -- lazy congruence-closure quotient of the term algebra;
* FreeGroupMarked  -- free group on marker constants, elements reduced words;
* AbelianMarked    -- finitely generated abelian group given by an integer
                      relation lattice in Hermite normal form.

Also: core extraction and minimality for finite tables, isomorphism checking
of minimal finite tables, the marker-instance group axioms, and evaluation of
universal sentences on finite tables.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

from . import syntax, term_model
from .errors import DomainError, NotMinimal, ParseError
from .syntax import Atomic, Eq, Family, Rel, Signature, Term
from .term_model import CongruenceClosure, Presentation


class MinimalStructure:
    """Oracle base: backends implement ``apply`` and ``rel_truth`` on handles."""

    sig: Signature

    def apply(self, head: str, args: tuple):
        raise NotImplementedError

    def rel_truth(self, sym: str, args: tuple) -> bool:
        return False

    def eval_term(self, t: Term):
        cache = self.__dict__.setdefault("_eval_cache", {})
        hit = cache.get(t)
        if hit is not None:
            return hit
        value = self.apply(t.head, tuple(self.eval_term(a) for a in t.args))
        cache[t] = value
        return value

    def holds_atom(self, a: Atomic) -> bool:
        if isinstance(a, Eq):
            return self.eval_term(a.lhs) == self.eval_term(a.rhs)
        return self.rel_truth(a.sym, tuple(self.eval_term(t) for t in a.args))

    def describe(self) -> str:
        return type(self).__name__


# ---------------------------------------------------------------------------
# finite tables


class FiniteTable(MinimalStructure):
    def __init__(self, sig: Signature, size: int,
                 consts: dict[str, int],
                 funcs: dict[str, dict[tuple[int, ...], int]],
                 rels: dict[str, frozenset[tuple[int, ...]]]):
        if size < 1:
            raise ValueError("universe must be nonempty")
        self.sig = sig
        self.size = size
        self.consts = dict(consts)
        self.funcs = {f: dict(tab) for f, tab in funcs.items()}
        self.rels = {r: frozenset(tups) for r, tups in rels.items()}
        self._validate()

    def _validate(self):
        table = self.sig.symbol_table()
        rng = range(self.size)
        for name, (kind, arity) in table.items():
            if kind == "const":
                if name not in self.consts or self.consts[name] not in rng:
                    raise ValueError(f"constant {name!r} missing or out of range")
            elif kind == "fn":
                tab = self.funcs.get(name)
                if tab is None or len(tab) != self.size ** arity:
                    raise ValueError(f"function table for {name!r} is not total")
                for args, val in tab.items():
                    if len(args) != arity or any(a not in rng for a in args) or val not in rng:
                        raise ValueError(f"function table for {name!r} is out of range")
            else:
                for tup in self.rels.get(name, ()):
                    if len(tup) != arity or any(a not in rng for a in tup):
                        raise ValueError(f"relation tuples for {name!r} are out of range")
        for name in self.consts:
            if table.get(name, (None,))[0] != "const":
                raise ValueError(f"{name!r} is not a declared constant")
        for name in self.funcs:
            if table.get(name, (None,))[0] != "fn":
                raise ValueError(f"{name!r} is not a declared function symbol")
        for name in self.rels:
            if table.get(name, (None,))[0] != "rel":
                raise ValueError(f"{name!r} is not a declared relation symbol")

    def apply(self, head: str, args: tuple):
        if not args:
            return self.consts[head]
        return self.funcs[head][args]

    def rel_truth(self, sym: str, args: tuple) -> bool:
        return args in self.rels.get(sym, frozenset())


def _reachable(M: FiniteTable) -> list[int]:
    """Elements generated by the constants, in deterministic discovery order."""
    order: list[int] = []
    seen: set[int] = set()
    for name, _ in M.sig.symbols("const"):
        v = M.consts[name]
        if v not in seen:
            seen.add(v)
            order.append(v)
    fns = M.sig.symbols("fn")
    changed = True
    while changed:
        changed = False
        for name, arity in fns:
            for args in itertools.product(order, repeat=arity):
                v = M.funcs[name][args]
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                    changed = True
    return order


def core(M: FiniteTable) -> FiniteTable:
    """The substructure generated by the empty set (always minimal)."""
    order = _reachable(M)
    remap = {old: new for new, old in enumerate(order)}
    consts = {name: remap[v] for name, v in M.consts.items()}
    funcs = {}
    for name, arity in M.sig.symbols("fn"):
        funcs[name] = {
            tuple(remap[a] for a in args): remap[M.funcs[name][args]]
            for args in itertools.product(order, repeat=arity)
        }
    rels = {}
    for name, _ in M.sig.symbols("rel"):
        rels[name] = frozenset(
            tuple(remap[a] for a in tup)
            for tup in M.rels.get(name, frozenset())
            if all(a in remap for a in tup))
    return FiniteTable(M.sig, len(order), consts, funcs, rels)


def is_minimal(M: FiniteTable) -> bool:
    cached = M.__dict__.get("_is_minimal")
    if cached is None:
        cached = len(_reachable(M)) == M.size
        M.__dict__["_is_minimal"] = cached
    return cached


def iso_check(M: FiniteTable, N: FiniteTable) -> bool:
    """Isomorphism of minimal finite tables: propagate the constant map
    through the functions, then check bijectivity and relation transfer."""
    if not syntax.same_symbols(M.sig, N.sig):
        raise DomainError("structures have different signatures")
    if not is_minimal(M) or not is_minimal(N):
        raise NotMinimal("iso_check requires minimal structures (take the core first)")
    if M.size != N.size:
        return False
    mapping: dict[int, int] = {}

    def assign(a: int, b: int) -> bool:
        if a in mapping:
            return mapping[a] == b
        mapping[a] = b
        return True

    for name, _ in M.sig.symbols("const"):
        if not assign(M.consts[name], N.consts[name]):
            return False
    fns = M.sig.symbols("fn")
    changed = True
    while changed:
        changed = False
        known = list(mapping.keys())
        for name, arity in fns:
            for args in itertools.product(known, repeat=arity):
                src = M.funcs[name][args]
                dst = N.funcs[name][tuple(mapping[a] for a in args)]
                if src not in mapping:
                    mapping[src] = dst
                    changed = True
                elif mapping[src] != dst:
                    return False
    if len(mapping) != M.size or len(set(mapping.values())) != N.size:
        return False
    for name, _ in M.sig.symbols("rel"):
        image = {tuple(mapping[a] for a in tup) for tup in M.rels.get(name, frozenset())}
        if image != set(N.rels.get(name, frozenset())):
            return False
    return True


# ---------------------------------------------------------------------------
# finitely presented structures


class FinitelyPresented(MinimalStructure):
    """Quotient of the ground term algebra by a finite set of positive atoms.

    Wraps a congruence closure; handles are class representatives.  The
    closure mutates on queries, so confine an instance to one thread and use
    ``clone`` for parallel workers.
    """

    def __init__(self, presentation: Presentation):
        self.sig = presentation.sig
        self.presentation = presentation
        self.cc = term_model.close(presentation)

    def clone(self) -> "FinitelyPresented":
        return FinitelyPresented(self.presentation)

    def apply(self, head: str, args: tuple):
        return self.cc.find(self.cc._lookup_or_create(head, args))

    def rel_truth(self, sym: str, args: tuple) -> bool:
        return self.cc.holds_rel(sym, args)

    def describe(self) -> str:
        return f"FinitelyPresented({len(self.presentation.atoms)} atoms)"


def saturate_to_table(M: FinitelyPresented, max_size: int = 64) -> FiniteTable | None:
    """Materialize a finitely presented structure as a finite table, or None
    if more than max_size element classes are discovered (the quotient may
    be infinite)."""
    if not M.sig.is_locally_finite():
        return None
    index: dict[int, int] = {}
    reps: list[int] = []

    def intern(handle: int) -> int | None:
        if handle not in index:
            if len(reps) >= max_size:
                return None
            index[handle] = len(reps)
            reps.append(handle)
        return index[handle]

    for name, _ in M.sig.symbols("const"):
        if intern(M.eval_term(Term(name))) is None:
            return None
    fns = M.sig.symbols("fn")
    changed = True
    while changed:
        changed = False
        for name, arity in fns:
            for args in itertools.product(list(reps), repeat=arity):
                before = len(reps)
                if intern(M.apply(name, args)) is None:
                    return None
                if len(reps) != before:
                    changed = True
    consts = {name: index[M.eval_term(Term(name))] for name, _ in M.sig.symbols("const")}
    funcs = {}
    for name, arity in fns:
        funcs[name] = {
            tuple(index[a] for a in args): index[M.apply(name, args)]
            for args in itertools.product(reps, repeat=arity)
        }
    rels = {}
    for name, _ in M.sig.symbols("rel"):
        tuples = set()
        for tup in M.cc._rel_facts.get(name, ()):
            tuples.add(tuple(index[M.cc.find(i)] for i in tup))
        rels[name] = frozenset(tuples)
    return FiniteTable(M.sig, len(reps), consts, funcs, rels)


# ---------------------------------------------------------------------------
# marked groups

GROUP_MUL = "mul"
GROUP_INV = "inv"
GROUP_E = "e"


def group_signature(markers: tuple[str, ...]) -> Signature:
    families = [Family("const", GROUP_E, 0)]
    families += [Family("const", m, 0) for m in markers]
    families += [Family("fn", GROUP_INV, 1), Family("fn", GROUP_MUL, 2)]
    return Signature(tuple(families))


def is_group_signature(sig: Signature) -> bool:
    table = sig.symbol_table() if sig.is_locally_finite() else None
    if table is None:
        return False
    if table.get(GROUP_MUL) != ("fn", 2) or table.get(GROUP_INV) != ("fn", 1):
        return False
    if table.get(GROUP_E) != ("const", 0):
        return False
    return all(kind != "rel" for kind, _ in table.values())


class FreeGroupMarked(MinimalStructure):
    """Free group on the marker constants; handles are freely reduced words
    of (marker index, +-1) letters."""

    def __init__(self, markers: tuple[str, ...]):
        if not markers:
            raise ValueError("at least one marker is required")
        self.markers = tuple(markers)
        self.sig = group_signature(self.markers)
        self._index = {m: i for i, m in enumerate(self.markers)}

    def apply(self, head: str, args: tuple):
        if head == GROUP_E:
            return ()
        if head == GROUP_INV:
            return tuple((i, -s) for i, s in reversed(args[0]))
        if head == GROUP_MUL:
            return _concat_reduce(args[0], args[1])
        return ((self._index[head], 1),)

    def describe(self) -> str:
        return f"FreeGroupMarked({', '.join(self.markers)})"


def _concat_reduce(u: tuple, v: tuple) -> tuple:
    out = list(u)
    for letter in v:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def _hnf(vectors, n: int) -> tuple[tuple[int, ...], ...]:
    """Row-style Hermite normal form of the integer lattice spanned by the
    vectors: pivot columns increase, pivots positive, entries above a pivot
    reduced into [0, pivot)."""
    rows = [list(v) for v in vectors if any(v)]
    result: list[list[int]] = []
    col = 0
    while rows and col < n:
        pivots = [r for r in rows if r[col] != 0]
        others = [r for r in rows if r[col] == 0]
        while len(pivots) > 1:
            pivots.sort(key=lambda r: abs(r[col]))
            base = pivots[0]
            kept = [base]
            for r in pivots[1:]:
                q = r[col] // base[col]
                if q:
                    for j in range(n):
                        r[j] -= q * base[j]
                if r[col] != 0:
                    kept.append(r)
                elif any(r):
                    others.append(r)
            pivots = kept
        piv = pivots[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        result.append(piv)
        rows = others
        col += 1
    for i in reversed(range(len(result))):
        pcol = next(j for j, x in enumerate(result[i]) if x != 0)
        for k in range(i):
            q = result[k][pcol] // result[i][pcol]
            if q:
                for j in range(n):
                    result[k][j] -= q * result[i][j]
    return tuple(tuple(r) for r in result)


class AbelianMarked(MinimalStructure):
    """Finitely generated abelian group on the markers as standard
    generators, modulo the lattice spanned by the relation rows; handles are
    the unique lattice-reduced exponent vectors."""

    def __init__(self, markers: tuple[str, ...], relations=()):
        if not markers:
            raise ValueError("at least one marker is required")
        self.markers = tuple(markers)
        self.rank = len(markers)
        for row in relations:
            if len(row) != self.rank:
                raise ValueError("relation row length must equal the number of markers")
        self.lattice = _hnf(relations, self.rank)
        self.sig = group_signature(self.markers)
        self._index = {m: i for i, m in enumerate(self.markers)}
        self._pivots = [(next(j for j, x in enumerate(row) if x), row) for row in self.lattice]

    def reduce(self, vec) -> tuple[int, ...]:
        v = list(vec)
        for pcol, row in self._pivots:
            q = v[pcol] // row[pcol]
            if q:
                for j in range(self.rank):
                    v[j] -= q * row[j]
        return tuple(v)

    def apply(self, head: str, args: tuple):
        if head == GROUP_E:
            return self.reduce((0,) * self.rank)
        if head == GROUP_INV:
            return self.reduce(tuple(-x for x in args[0]))
        if head == GROUP_MUL:
            return self.reduce(tuple(x + y for x, y in zip(args[0], args[1])))
        vec = [0] * self.rank
        vec[self._index[head]] = 1
        return self.reduce(vec)

    def describe(self) -> str:
        return f"AbelianMarked({', '.join(self.markers)}; {len(self.lattice)} relations)"


def theta_sentences(sig: Signature, markers) -> list[Atomic]:
    """The group-axiom instances on marker constants: associativity over all
    marker triples, identity and inverse laws at each marker."""
    table = sig.symbol_table() if sig.is_locally_finite() else {}
    if table.get(GROUP_MUL) != ("fn", 2) or table.get(GROUP_INV) != ("fn", 1) \
            or table.get(GROUP_E) != ("const", 0):
        raise DomainError("signature does not contain the group symbols mul/2, inv/1, e")
    markers = tuple(markers)
    for m in markers:
        if table.get(m) != ("const", 0):
            raise DomainError(f"marker {m!r} is not a constant of the signature")
    e = Term(GROUP_E)
    mul = lambda a, b: Term(GROUP_MUL, (a, b))
    inv = lambda a: Term(GROUP_INV, (a,))
    out: list[Atomic] = []
    for a, b, c in itertools.product(markers, repeat=3):
        ta, tb, tc = Term(a), Term(b), Term(c)
        out.append(Eq(mul(mul(ta, tb), tc), mul(ta, mul(tb, tc))))
    for m in markers:
        t = Term(m)
        out.append(Eq(mul(t, e), t))
        out.append(Eq(mul(e, t), t))
        out.append(Eq(mul(t, inv(t)), e))
        out.append(Eq(mul(inv(t), t), e))
    return out


def satisfies_theta(M: MinimalStructure, markers) -> bool:
    """Whether all marker-instance group axioms hold in M.  Only constant
    instances are checked, so the oracle alone decides this."""
    return all(M.holds_atom(a) for a in theta_sentences(M.sig, markers))


# ---------------------------------------------------------------------------
# universal sentences on finite tables


@dataclass(frozen=True)
class Var:
    idx: int


@dataclass(frozen=True)
class OpenApp:
    head: str
    args: tuple["OpenTerm", ...] = ()


OpenTerm = Union[Var, OpenApp]


@dataclass(frozen=True)
class OpenEq:
    lhs: OpenTerm
    rhs: OpenTerm


@dataclass(frozen=True)
class OpenRel:
    sym: str
    args: tuple[OpenTerm, ...]


@dataclass(frozen=True)
class Universal:
    """For-all closure of a quantifier-free matrix built from open atoms with
    the connectives And/Or/Not."""

    var_count: int
    matrix: object


def _eval_open_term(M: MinimalStructure, t: OpenTerm, env: tuple):
    if isinstance(t, Var):
        return env[t.idx]
    return M.apply(t.head, tuple(_eval_open_term(M, a, env) for a in t.args))


def eval_open_matrix(M: MinimalStructure, phi, env: tuple) -> bool:
    if isinstance(phi, OpenEq):
        return _eval_open_term(M, phi.lhs, env) == _eval_open_term(M, phi.rhs, env)
    if isinstance(phi, OpenRel):
        return M.rel_truth(phi.sym, tuple(_eval_open_term(M, a, env) for a in phi.args))
    if isinstance(phi, syntax.Not):
        return not eval_open_matrix(M, phi.child, env)
    if isinstance(phi, syntax.And):
        return eval_open_matrix(M, phi.lhs, env) and eval_open_matrix(M, phi.rhs, env)
    if isinstance(phi, syntax.Or):
        return eval_open_matrix(M, phi.lhs, env) or eval_open_matrix(M, phi.rhs, env)
    raise TypeError(f"not an open matrix node: {phi!r}")


def eval_universal(M: FiniteTable, psi: Universal) -> bool:
    """Truth of a universal sentence on a finite table, by exhausting all
    variable assignments."""
    if not isinstance(M, FiniteTable):
        raise DomainError("universal evaluation requires a finite table")
    for env in itertools.product(range(M.size), repeat=psi.var_count):
        if not eval_open_matrix(M, psi.matrix, env):
            return False
    return True


# ---------------------------------------------------------------------------
# structure files


def parse_finite_table(text: str) -> FiniteTable:
    """Table format: ``universe <n>;`` then ``const c = i;``,
    ``fn f/k = <n^k row-major values>;``, ``rel R/k = (i, j) ...;`` lines.
    The signature is inferred from the declarations."""
    stream = syntax.TokenStream(syntax.tokenize(text))
    kw = stream.expect("name")
    if kw.value != "universe":
        raise ParseError(f"expected 'universe', found {kw.value!r}", kw.line, kw.column)
    size = int(stream.expect("int").value)
    stream.expect(";")
    families: list[Family] = []
    consts: dict[str, int] = {}
    funcs: dict[str, dict[tuple[int, ...], int]] = {}
    rels: dict[str, frozenset[tuple[int, ...]]] = {}
    while not stream.at_eof():
        kw = stream.expect("name")
        if kw.value == "const":
            name = stream.expect("name")
            stream.expect("=")
            val = int(stream.expect("int").value)
            stream.expect(";")
            families.append(Family("const", name.value, 0))
            consts[name.value] = val
        elif kw.value == "fn":
            name = stream.expect("name")
            stream.expect("/")
            arity = int(stream.expect("int").value)
            stream.expect("=")
            values = []
            while stream.peek().kind == "int":
                values.append(int(stream.next().value))
            stream.expect(";")
            if len(values) != size ** arity:
                raise ParseError(
                    f"function {name.value!r} needs {size ** arity} values, got {len(values)}",
                    name.line, name.column)
            table = {}
            for flat, args in enumerate(itertools.product(range(size), repeat=arity)):
                table[args] = values[flat]
            families.append(Family("fn", name.value, arity))
            funcs[name.value] = table
        elif kw.value == "rel":
            name = stream.expect("name")
            stream.expect("/")
            arity = int(stream.expect("int").value)
            stream.expect("=")
            tuples = set()
            while stream.peek().kind == "(":
                stream.next()
                tup = [int(stream.expect("int").value)]
                while stream.peek().kind == ",":
                    stream.next()
                    tup.append(int(stream.expect("int").value))
                stream.expect(")")
                if len(tup) != arity:
                    raise ParseError(f"relation {name.value!r} tuple has wrong arity",
                                     name.line, name.column)
                tuples.add(tuple(tup))
            stream.expect(";")
            families.append(Family("rel", name.value, arity))
            rels[name.value] = frozenset(tuples)
        else:
            raise ParseError(f"expected 'const', 'fn' or 'rel', found {kw.value!r}",
                             kw.line, kw.column)
    tok = stream.peek()
    try:
        sig = Signature(tuple(families))
        return FiniteTable(sig, size, consts, funcs, rels)
    except ValueError as e:
        raise ParseError(str(e), tok.line, tok.column) from None


def parse_group(text: str) -> Union[FreeGroupMarked, AbelianMarked]:
    """Group format: ``group free|abelian; markers c1 c2 ...;`` followed, for
    abelian groups, by ``row <ints>;`` lattice generators."""
    stream = syntax.TokenStream(syntax.tokenize(text))
    kw = stream.expect("name")
    if kw.value != "group":
        raise ParseError(f"expected 'group', found {kw.value!r}", kw.line, kw.column)
    flavor = stream.expect("name")
    if flavor.value not in ("free", "abelian"):
        raise ParseError(f"expected 'free' or 'abelian', found {flavor.value!r}",
                         flavor.line, flavor.column)
    stream.expect(";")
    kw = stream.expect("name")
    if kw.value != "markers":
        raise ParseError(f"expected 'markers', found {kw.value!r}", kw.line, kw.column)
    markers = []
    while stream.peek().kind == "name":
        markers.append(stream.next().value)
    stream.expect(";")
    rows = []
    while not stream.at_eof():
        kw = stream.expect("name")
        if kw.value != "row":
            raise ParseError(f"expected 'row', found {kw.value!r}", kw.line, kw.column)
        if flavor.value != "abelian":
            raise ParseError("relation rows are only allowed for abelian groups",
                             kw.line, kw.column)
        row = []
        while stream.peek().kind == "int":
            row.append(int(stream.next().value))
        stream.expect(";")
        if len(row) != len(markers):
            raise ParseError(f"row needs {len(markers)} entries, got {len(row)}",
                             kw.line, kw.column)
        rows.append(tuple(row))
    try:
        if flavor.value == "free":
            return FreeGroupMarked(tuple(markers))
        return AbelianMarked(tuple(markers), rows)
    except ValueError as e:
        raise ParseError(str(e), flavor.line, flavor.column) from None


def load_structure(text: str) -> MinimalStructure:
    """Dispatch on the first keyword: ``group`` files, ``universe`` tables,
    otherwise a presentation (a bare signature is the free term model)."""
    stream = syntax.TokenStream(syntax.tokenize(text))
    tok = stream.peek()
    if tok.kind == "eof":
        raise ParseError("empty structure file", tok.line, tok.column)
    if tok.kind == "name" and tok.value == "group":
        return parse_group(text)
    if tok.kind == "name" and tok.value == "universe":
        return parse_finite_table(text)
    return FinitelyPresented(term_model.parse_presentation(text))
