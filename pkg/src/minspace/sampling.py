"""Seeded random instances for the self-test suite.

Small finitely presented structures over a fixed pool of signatures, and
exact-rational metric spaces from integer grid points.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .gromov_hausdorff import FiniteSemiMetric
from .structures import FinitelyPresented
from .syntax import Eq, Family, Rel, Signature, Term, enumerate_terms
from .term_model import Presentation

SIGNATURE_POOL: tuple[Signature, ...] = (
    Signature((Family("const", "c", 0), Family("fn", "f", 1))),
    Signature((Family("const", "c", 0), Family("const", "d", 0), Family("fn", "f", 1))),
    Signature((Family("const", "c", 0), Family("fn", "f", 1), Family("rel", "P", 1))),
    Signature((Family("const", "c", 0), Family("fn", "g", 2))),
)


def sample_presentation(rng: random.Random, sig: Signature,
                        max_atoms: int = 5, term_length: int = 5) -> Presentation:
    terms = enumerate_terms(sig, term_length)
    rels = sig.symbols("rel")
    atoms = []
    for _ in range(rng.randint(0, max_atoms)):
        if rels and rng.random() < 0.3:
            name, arity = rng.choice(rels)
            atoms.append(Rel(name, tuple(rng.choice(terms) for _ in range(arity))))
        else:
            atoms.append(Eq(rng.choice(terms), rng.choice(terms)))
    return Presentation(sig, tuple(atoms))


def sample_structure(rng: random.Random, sig: Signature | None = None) -> FinitelyPresented:
    if sig is None:
        sig = rng.choice(SIGNATURE_POOL)
    return FinitelyPresented(sample_presentation(rng, sig))


def sample_metric(rng: random.Random, n: int, span: int = 8,
                  denominator: int = 2) -> FiniteSemiMetric:
    """n distinct labeled points in a rational grid square with the taxicab
    distance; exact and triangle-correct by construction."""
    points: list[tuple[int, int]] = []
    while len(points) < n:
        p = (rng.randint(0, span), rng.randint(0, span))
        if p not in points:
            points.append(p)
    q = Fraction(1, denominator)
    labels = [f"p{i}" for i in range(n)]
    dist = [[(abs(a[0] - b[0]) + abs(a[1] - b[1])) * q for b in points] for a in points]
    return FiniteSemiMetric(labels, dist)
