"""m-closeness and the distance 1/m between minimal structures.

Two structures are m-close when they agree on every atomic sentence of
length at most m.  The distance is 1/m for the largest such m, 0 for
isomorphic structures.  Isomorphism is undecidable for the lazy backends, so
the computed distance is one of three certified shapes:

* ExactOneOver(m): a least disagreeing atom of length m+1 was found;
* ExactZero: an isomorphism certificate exists (finite backends, equal
  presentations, or saturation to isomorphic finite tables);
* AtMostOneOver(m_cap): agreement was verified through the cap with neither
  a disagreement nor a certificate.

Scanning walks atom lengths level by level.  Per level, equation agreement
is decided by grouping term values: a disagreement at split (a, b) exists
iff some length-a term has, among the length-b terms sharing its value in
one structure, two distinct values in the other.  Only the first
disagreeing level pays for locating the canonically least witness atom.
"""
from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from . import structures, syntax
from .errors import NotMinimal, SignatureMismatch
from .structures import FiniteTable, FinitelyPresented, MinimalStructure
from .syntax import Atomic, Eq, Rel, Signature, Term

DEFAULT_CAP = 12


@dataclass(frozen=True)
class ExactZero:
    certificate: str = "isomorphism"


@dataclass(frozen=True)
class ExactOneOver:
    m: int
    witness: Atomic


@dataclass(frozen=True)
class AtMostOneOver:
    m_cap: int


Distance = Union[ExactZero, ExactOneOver, AtMostOneOver]


def format_distance(d: Distance) -> str:
    if isinstance(d, ExactZero):
        return "0"
    if isinstance(d, ExactOneOver):
        return f"1/{d.m}"
    return f"<=1/{d.m_cap}"


def upper_value(d: Distance) -> Fraction:
    if isinstance(d, ExactZero):
        return Fraction(0)
    if isinstance(d, ExactOneOver):
        return Fraction(1, d.m)
    return Fraction(1, d.m_cap)


def lower_value(d: Distance) -> Fraction:
    if isinstance(d, AtMostOneOver):
        return Fraction(0)
    return upper_value(d)


# ---------------------------------------------------------------------------
# shared enumeration and per-structure value tapes


class _Scanner:
    """Terms and relation atoms of each exact length for one signature."""

    def __init__(self, sig: Signature, cutoff: int | None):
        self.sig = sig
        self.cutoff = cutoff
        self.term_levels: list[list[Term]] = [[], []]
        self.rel_levels: list[list[Rel]] = [[], []]
        self._consts = sig.symbols("const", cutoff)
        self._fns = sig.symbols("fn", cutoff)
        self._rels = sig.symbols("rel", cutoff)
        self.term_levels[1] = [Term(name) for name, _ in self._consts]

    def ensure(self, length: int) -> None:
        while len(self.term_levels) <= length:
            current = len(self.term_levels)
            out = []
            for name, arity in self._fns:
                for comp in syntax._compositions(current - 1, arity):
                    pools = [self.term_levels[c] for c in comp]
                    if any(not p for p in pools):
                        continue
                    for args in itertools.product(*pools):
                        out.append(Term(name, args))
            out.sort(key=syntax.symbol_seq)
            self.term_levels.append(out)
            rel_out = []
            for name, arity in self._rels:
                for comp in syntax._compositions(current - 1, arity):
                    pools = [self.term_levels[c] for c in comp]
                    if any(not p for p in pools):
                        continue
                    for args in itertools.product(*pools):
                        rel_out.append(Rel(name, args))
            rel_out.sort(key=lambda r: (r.sym, tuple(syntax.symbol_seq(t) for t in r.args)))
            self.rel_levels.append(rel_out)


_scanners: dict = {}


def _scanner_for(sig: Signature, cutoff: int | None) -> _Scanner:
    key = (sig, cutoff)
    scanner = _scanners.get(key)
    if scanner is None:
        scanner = _Scanner(sig, cutoff)
        _scanners[key] = scanner
    return scanner


class _Tape:
    """Per-structure canonical integer ids for the scanner's terms."""

    def __init__(self, struct: MinimalStructure, scanner: _Scanner):
        self.struct = struct
        self.scanner = scanner
        self.levels: list[list[int]] = [[], []]
        self._intern: dict = {}

    def level(self, length: int) -> list[int]:
        self.scanner.ensure(length)
        while len(self.levels) <= length:
            current = len(self.levels)
            ids = []
            intern = self._intern
            for t in self.scanner.term_levels[current]:
                handle = self.struct.eval_term(t)
                hit = intern.get(handle)
                if hit is None:
                    hit = len(intern)
                    intern[handle] = hit
                ids.append(hit)
            self.levels.append(ids)
        return self.levels[length]


_tapes: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _tape_for(struct: MinimalStructure, scanner: _Scanner) -> _Tape:
    per_struct = _tapes.setdefault(struct, {})
    key = id(scanner)
    tape = per_struct.get(key)
    if tape is None:
        tape = _Tape(struct, scanner)
        per_struct[key] = tape
    return tape


def _check_pair(M: MinimalStructure, N: MinimalStructure, cutoff: int | None) -> _Scanner:
    if not syntax.same_symbols(M.sig, N.sig):
        raise SignatureMismatch("structures have different signatures")
    for s in (M, N):
        if isinstance(s, FiniteTable) and not structures.is_minimal(s):
            raise NotMinimal("finite table is not minimal (take its core first)")
    return _scanner_for(M.sig, cutoff)


def _eq_split_disagrees(va, vb, wa, wb) -> bool:
    """Whether some equation s = t with s of the first and t of the second
    length block separates the two structures; v*/w* are the id tapes."""
    by_m: dict = {}
    by_n: dict = {}
    for j in range(len(vb)):
        v, w = vb[j], wb[j]
        got = by_m.get(v)
        if got is None:
            by_m[v] = w
        elif got != w and got != -1:
            by_m[v] = -1
        got = by_n.get(w)
        if got is None:
            by_n[w] = v
        elif got != v and got != -1:
            by_n[w] = -1
    for i in range(len(va)):
        v, w = va[i], wa[i]
        got = by_m.get(v)
        if got is not None and got != w:
            return True
        got = by_n.get(w)
        if got is not None and got != v:
            return True
    return False


def _level_disagrees(M, N, tape_m: _Tape, tape_n: _Tape, scanner: _Scanner,
                     length: int) -> bool:
    for a in range(1, length - 1):
        b = length - 1 - a
        va, wa = tape_m.level(a), tape_n.level(a)
        vb, wb = tape_m.level(b), tape_n.level(b)
        if _eq_split_disagrees(va, vb, wa, wb):
            return True
    scanner.ensure(length)
    for atom in scanner.rel_levels[length]:
        if M.holds_atom(atom) != N.holds_atom(atom):
            return True
    return False


def _least_witness_at(M, N, tape_m: _Tape, tape_n: _Tape, scanner: _Scanner,
                      length: int) -> Optional[Atomic]:
    best: Optional[Eq] = None
    best_key = None
    for a in range(1, length - 1):
        b = length - 1 - a
        terms_a, terms_b = scanner.term_levels[a], scanner.term_levels[b]
        va, wa = tape_m.level(a), tape_n.level(a)
        vb, wb = tape_m.level(b), tape_n.level(b)
        for i in range(len(terms_a)):
            for j in range(len(terms_b)):
                if (va[i] == vb[j]) != (wa[i] == wb[j]):
                    key = (syntax.symbol_seq(terms_a[i]), syntax.symbol_seq(terms_b[j]))
                    if best_key is None or key < best_key:
                        best_key = key
                        best = Eq(terms_a[i], terms_b[j])
    if best is not None:
        return best
    for atom in scanner.rel_levels[length]:
        if M.holds_atom(atom) != N.holds_atom(atom):
            return atom
    return None


def m_close(M: MinimalStructure, N: MinimalStructure, m: int,
            cutoff: int | None = None) -> bool:
    """Agreement on every atomic sentence of length <= m."""
    scanner = _check_pair(M, N, cutoff)
    if M is N:
        return True
    tape_m, tape_n = _tape_for(M, scanner), _tape_for(N, scanner)
    for length in range(2, m + 1):
        if _level_disagrees(M, N, tape_m, tape_n, scanner, length):
            return False
    return True


def first_disagreement(M: MinimalStructure, N: MinimalStructure,
                       m_cap: int = DEFAULT_CAP,
                       cutoff: int | None = None) -> Optional[Atomic]:
    """The length-least, then canonically least atom of length <= m_cap + 1
    on which the structures differ, or None."""
    scanner = _check_pair(M, N, cutoff)
    if M is N:
        return None
    tape_m, tape_n = _tape_for(M, scanner), _tape_for(N, scanner)
    for length in range(2, m_cap + 2):
        if _level_disagrees(M, N, tape_m, tape_n, scanner, length):
            return _least_witness_at(M, N, tape_m, tape_n, scanner, length)
    return None


def _structural_zero(M: MinimalStructure, N: MinimalStructure) -> str | None:
    """A cheap isomorphism certificate, or None."""
    if M is N:
        return "identity"
    if isinstance(M, FiniteTable) and isinstance(N, FiniteTable):
        if structures.iso_check(M, N):
            return "isomorphism"
        return None
    if isinstance(M, FinitelyPresented) and isinstance(N, FinitelyPresented):
        if M.presentation.canonical_atoms() == N.presentation.canonical_atoms():
            return "equal-presentation"
    if isinstance(M, structures.FreeGroupMarked) and isinstance(N, structures.FreeGroupMarked):
        if M.markers == N.markers:
            return "equal-markers"
        return None
    if isinstance(M, structures.AbelianMarked) and isinstance(N, structures.AbelianMarked):
        if M.markers == N.markers and M.lattice == N.lattice:
            return "equal-lattice"
        return None
    tables = []
    for s in (M, N):
        if isinstance(s, FiniteTable):
            tables.append(s)
        elif isinstance(s, FinitelyPresented):
            tab = structures.saturate_to_table(s)
            if tab is None:
                return None
            tables.append(tab)
        else:
            return None
    if structures.iso_check(tables[0], tables[1]):
        return "saturation-isomorphism"
    return None


def distance(M: MinimalStructure, N: MinimalStructure, m_cap: int = DEFAULT_CAP,
             cutoff: int | None = None) -> Distance:
    """The ultrametric distance, certified.

    Scans atom lengths 2 .. m_cap+1; a first disagreement at length m+1
    yields ExactOneOver(m).  With no disagreement, ExactZero requires an
    isomorphism certificate; otherwise the result is the upper bound
    AtMostOneOver(m_cap).
    """
    if m_cap < 1:
        raise ValueError("m_cap must be >= 1")
    scanner = _check_pair(M, N, cutoff)
    if M is not N:
        tape_m, tape_n = _tape_for(M, scanner), _tape_for(N, scanner)
        for length in range(2, m_cap + 2):
            if _level_disagrees(M, N, tape_m, tape_n, scanner, length):
                witness = _least_witness_at(M, N, tape_m, tape_n, scanner, length)
                return ExactOneOver(length - 1, witness)
    certificate = _structural_zero(M, N)
    if certificate is not None:
        return ExactZero(certificate)
    return AtMostOneOver(m_cap)


@dataclass(frozen=True)
class TripleReport:
    ok: bool
    conservative: bool
    d_mq: Distance
    d_mn: Distance
    d_nq: Distance


def check_semi_ultrametric(triples, m_cap: int = DEFAULT_CAP,
                           cutoff: int | None = None) -> list[TripleReport]:
    """Verify d(M,Q) <= max(d(M,N), d(N,Q)) for each triple.

    Bounds are handled conservatively: a violation is reported only when the
    certified lower value of d(M,Q) exceeds both certified upper values.
    """
    reports = []
    for M, N, Q in triples:
        d_mq = distance(M, Q, m_cap, cutoff)
        d_mn = distance(M, N, m_cap, cutoff)
        d_nq = distance(N, Q, m_cap, cutoff)
        bound = max(upper_value(d_mn), upper_value(d_nq))
        ok = lower_value(d_mq) <= bound
        conservative = any(isinstance(d, AtMostOneOver) for d in (d_mq, d_mn, d_nq))
        reports.append(TripleReport(ok, conservative, d_mq, d_mn, d_nq))
    return reports
