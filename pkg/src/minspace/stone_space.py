"""Quantifier-free evaluation, finite cover certificates, and separated
families.

An m-type is a consistent total sign assignment over all atomic sentences of
length <= m; the structures realizing it form one 1/m-ball, and the list of
all m-types is a finite cover certificate for locally finite signatures.
For signatures with a countably indexed family, arbitrarily large families
of pairwise far-apart structures exist instead; ``separated_family``
constructs them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import structures, syntax, term_model
from .errors import BudgetExceeded, DomainError, LocallyFinite, NotLocallyFinite
from .structures import FinitelyPresented, MinimalStructure
from .syntax import And, Atomic, Eq, Not, Or, QFSentence, Rel, Signature, Term
from .term_model import GroundLiteral, Presentation

DEFAULT_ATOM_BUDGET = 22


def evaluate(phi: QFSentence, M: MinimalStructure) -> bool:
    """Truth of a quantifier-free sentence in M, by structural recursion."""
    if isinstance(phi, (Eq, Rel)):
        return M.holds_atom(phi)
    if isinstance(phi, Not):
        return not evaluate(phi.child, M)
    if isinstance(phi, And):
        return evaluate(phi.lhs, M) and evaluate(phi.rhs, M)
    if isinstance(phi, Or):
        return evaluate(phi.lhs, M) or evaluate(phi.rhs, M)
    raise TypeError(f"not a quantifier-free sentence: {phi!r}")


# ---------------------------------------------------------------------------
# m-types and cover certificates


@dataclass(frozen=True)
class MType:
    """A consistent total sign assignment over the atoms of length <= m."""

    sig: Signature
    m: int
    atoms: tuple[Atomic, ...]
    signs: tuple[bool, ...]
    witness: Presentation

    def literals(self) -> tuple[GroundLiteral, ...]:
        return tuple(GroundLiteral(a, s) for a, s in zip(self.atoms, self.signs))

    def sign_string(self) -> str:
        return "".join("+" if s else "-" for s in self.signs)


@dataclass(frozen=True)
class CoverCertificate:
    """All m-types of a signature.  The corresponding balls are pairwise
    disjoint (distinct total assignments) and cover the whole space (the
    enumeration is exhaustive over consistent assignments)."""

    sig: Signature
    m: int
    atoms: tuple[Atomic, ...]
    types: tuple[MType, ...]


def enumerate_m_types(sig: Signature, m: int,
                      budget: int = DEFAULT_ATOM_BUDGET) -> list[MType]:
    """All consistent sign assignments over the atoms of length <= m, each
    with its term-model witness, in depth-first order (positive sign first)
    along the canonical atom order.  Partial assignments are pruned by
    consistency, which is sound because subsets of consistent sets are
    consistent."""
    if not sig.is_locally_finite():
        raise NotLocallyFinite("m-type enumeration requires a locally finite signature")
    atoms = tuple(syntax.enumerate_atomic(sig, m))
    if len(atoms) > budget:
        raise BudgetExceeded(
            f"{len(atoms)} atoms at level {m} exceed the enumeration budget {budget}")
    out: list[MType] = []
    signs: list[bool] = []

    def descend(k: int) -> None:
        if k == len(atoms):
            literals = [GroundLiteral(a, s) for a, s in zip(atoms, signs)]
            verdict = term_model.consistent(sig, literals)
            if verdict.ok:
                out.append(MType(sig, m, atoms, tuple(signs), verdict.witness))
            return
        for sign in (True, False):
            signs.append(sign)
            literals = [GroundLiteral(a, s) for a, s in zip(atoms, signs)]
            if term_model.consistent(sig, literals).ok:
                descend(k + 1)
            signs.pop()

    descend(0)
    return out


def cover_certificate(sig: Signature, m: int,
                      budget: int = DEFAULT_ATOM_BUDGET) -> CoverCertificate:
    types = enumerate_m_types(sig, m, budget)
    return CoverCertificate(sig, m, types[0].atoms if types else tuple(syntax.enumerate_atomic(sig, m)),
                            tuple(types))


def ball_membership(M: MinimalStructure, T: MType) -> bool:
    """Whether M's atomic truths of length <= m equal the type's signs."""
    if not syntax.same_symbols(M.sig, T.sig):
        raise DomainError("structure and type have different signatures")
    return all(M.holds_atom(a) == s for a, s in zip(T.atoms, T.signs))


# ---------------------------------------------------------------------------
# separated families for non-locally-finite signatures


@dataclass(frozen=True)
class SeparatedFamily:
    """k structures pairwise disagreeing on equal-length atoms theta_i: the
    i-th structure satisfies theta_i and falsifies every other theta_j, so
    the structures are pairwise not level-close and pairwise at distance at
    least 1/level."""

    structures: tuple[FinitelyPresented, ...]
    thetas: tuple[Atomic, ...]
    level: int
    cutoff: int


def separated_family(sig: Signature, k: int, m: int | None = None) -> SeparatedFamily:
    """Witnesses non-total-boundedness: k structures with pairwise distance
    >= 1/level, built from the first countably indexed family.  If m is
    given it must equal the family's separation level."""
    if sig.is_locally_finite():
        raise LocallyFinite("signature is locally finite; no separated family exists")
    if k < 1:
        raise ValueError("k must be >= 1")
    family = next(f for f in sig.families if f.is_infinite)

    base_const: str | None = None
    shift = 0
    for fam in sig.families:
        if fam.kind == "const" and not fam.is_infinite:
            base_const = next(fam.names())
            break
    if base_const is None:
        if family.kind == "const":
            # the indexed constants are the only constants: use index 0 as base
            base_const = f"{family.base}_0"
            shift = 1
        else:
            family_const = next(f for f in sig.families if f.kind == "const")
            base_const = f"{family_const.base}_0"
    c = Term(base_const)

    thetas: list[Atomic] = []
    for i in range(shift, k + shift):
        name = f"{family.base}_{i}"
        if family.kind == "const":
            thetas.append(Eq(Term(name), c))
        elif family.kind == "fn":
            thetas.append(Eq(Term(name, (c,) * family.arity), c))
        else:
            thetas.append(Rel(name, (c,) * family.arity))
    level = syntax.atom_length(thetas[0])
    if m is not None and m != level:
        raise DomainError(
            f"requested separation level {m}, but the family separates at level {level}")
    members = tuple(FinitelyPresented(Presentation(sig, (theta,))) for theta in thetas)
    return SeparatedFamily(members, tuple(thetas), level, k + shift)


# ---------------------------------------------------------------------------
# marked groups inside the space


def in_GC(M: MinimalStructure, markers) -> bool:
    """Membership in the class of marked groups cut out by the finite
    marker-instance axiom set.  For a countably indexed marker set the
    single defining sentence does not exist; the check is refused (the
    instances could still be evaluated one by one)."""
    markers = tuple(markers)
    for name in markers:
        info = M.sig.resolve(name)
        if info is None or info != ("const", 0):
            raise DomainError(f"marker {name!r} is not a constant of the signature")
    return structures.satisfies_theta(M, markers)


# ---------------------------------------------------------------------------
# existential witness search


def existential_witness(M: MinimalStructure, var_count: int, matrix,
                        max_term_length: int,
                        cutoff: int | None = None) -> tuple[Term, ...] | None:
    """A tuple of ground terms realizing an existential sentence in M, found
    by substitution search over all term tuples with entries of length <=
    max_term_length, in canonical order; None if no such tuple works."""
    terms = syntax.enumerate_terms(M.sig, max_term_length, cutoff)
    handles = [M.eval_term(t) for t in terms]
    for combo in itertools.product(range(len(terms)), repeat=var_count):
        env = tuple(handles[i] for i in combo)
        if structures.eval_open_matrix(M, matrix, env):
            return tuple(terms[i] for i in combo)
    return None
