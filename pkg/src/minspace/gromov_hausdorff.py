"""Exact finite (semi-)metric geometry.

Distances are exact rationals, with an explicit infinity absorbing sums and
comparisons.  Covers: quotients by zero distance, Hausdorff distance between
subsets, exact Gromov-Hausdorff distance for small spaces by branch-and-bound
over correspondences, greedy epsilon-nets, cover-count bounds, the threshold
relation encoding of a space with its axiom checks, and the net comparator
that converts agreement on thresholded net relations into a 5*eps/2 bound on
the Gromov-Hausdorff distance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import BudgetExceeded, DomainError, ParseError

INF = float("inf")
Value = Union[Fraction, float]

GH_BUDGET = 6
EXACT_COVER_LIMIT = 12


def is_infinite(v: Value) -> bool:
    return v == INF


def _add(a: Value, b: Value) -> Value:
    if is_infinite(a) or is_infinite(b):
        return INF
    return a + b


def format_value(v: Value) -> str:
    return "inf" if is_infinite(v) else str(v)


def parse_value(text: str) -> Value:
    text = text.strip()
    if text == "inf":
        return INF
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational distance: {text!r}") from None


# ---------------------------------------------------------------------------
# finite semi-metric spaces


class FiniteSemiMetric:
    """Labeled points with an exact symmetric distance matrix; zero diagonal,
    nonnegative entries, triangle inequality with infinity absorbing."""

    def __init__(self, labels: Sequence[str], dist: Sequence[Sequence[Value]]):
        self.labels = tuple(labels)
        self.dist = tuple(tuple(row) for row in dist)
        n = len(self.labels)
        if n == 0:
            raise ValueError("a space needs at least one point")
        if len(set(self.labels)) != n:
            raise ValueError("point labels must be distinct")
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise ValueError("distance matrix shape does not match the labels")
        for i in range(n):
            if self.dist[i][i] != 0:
                raise ValueError(f"nonzero self-distance at {self.labels[i]!r}")
            for j in range(n):
                v = self.dist[i][j]
                if not is_infinite(v) and v < 0:
                    raise ValueError("distances must be nonnegative")
                if self.dist[i][j] != self.dist[j][i]:
                    raise ValueError("distance matrix must be symmetric")
        for i, j, k in itertools.product(range(n), repeat=3):
            if self.dist[i][k] > _add(self.dist[i][j], self.dist[j][k]):
                raise ValueError(
                    f"triangle inequality fails at ({self.labels[i]}, {self.labels[j]}, "
                    f"{self.labels[k]})")

    @property
    def size(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int) -> Value:
        return self.dist[i][j]

    def diameter(self) -> Value:
        return max(v for row in self.dist for v in row)

    def is_metric(self) -> bool:
        return all(self.dist[i][j] != 0
                   for i in range(self.size) for j in range(self.size) if i != j)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown point label {label!r}") from None

    def has_finite_distances(self) -> bool:
        return all(not is_infinite(v) for row in self.dist for v in row)


def parse_metric(text: str) -> FiniteSemiMetric:
    """CSV-like format: first row the point labels, then the matrix rows;
    entries are rationals like ``3/2`` or ``0.5``, or ``inf``."""
    rows = [line.strip() for line in text.splitlines()]
    rows = [r for r in rows if r and not r.startswith("#")]
    if not rows:
        raise ParseError("empty metric file")
    labels = [cell.strip() for cell in rows[0].split(",")]
    n = len(labels)
    if len(rows) != n + 1:
        raise ParseError(f"expected {n} matrix rows for {n} labels, got {len(rows) - 1}")
    matrix = []
    for line in rows[1:]:
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != n:
            raise ParseError(f"matrix row has {len(cells)} entries, expected {n}")
        matrix.append([parse_value(c) for c in cells])
    try:
        return FiniteSemiMetric(labels, matrix)
    except ValueError as e:
        raise DomainError(f"invalid semi-metric: {e}") from None


def print_metric(X: FiniteSemiMetric) -> str:
    lines = [", ".join(X.labels)]
    for row in X.dist:
        lines.append(", ".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def quotient(X: FiniteSemiMetric) -> FiniteSemiMetric:
    """Identify points at distance zero; the result is a metric space."""
    reps: list[int] = []
    cls: list[int] = []
    for i in range(X.size):
        for r_idx, r in enumerate(reps):
            if X.d(i, r) == 0:
                cls.append(r_idx)
                break
        else:
            cls.append(len(reps))
            reps.append(i)
    labels = [X.labels[r] for r in reps]
    dist = [[X.d(a, b) for b in reps] for a in reps]
    return FiniteSemiMetric(labels, dist)


def hausdorff_distance(Z: FiniteSemiMetric, A: Sequence[int], B: Sequence[int]) -> Value:
    """max-min distance between two nonempty point subsets of Z."""
    if not A or not B:
        raise DomainError("Hausdorff distance needs nonempty subsets")
    forward = max(min(Z.d(a, b) for b in B) for a in A)
    backward = max(min(Z.d(a, b) for a in A) for b in B)
    return max(forward, backward)


# ---------------------------------------------------------------------------
# Gromov-Hausdorff distance


@dataclass(frozen=True)
class GHResult:
    value: Fraction
    correspondence: tuple[tuple[str, str], ...]


def _min_distortion(dx, dy):
    """Least max |d_X - d_Y| over correspondences, by branch and bound.

    Every correspondence contains the union of a function X -> Y and a
    function Y -> X (and that union is itself a correspondence), so the
    minimum over correspondences equals the minimum over such pairs.
    """
    nx, ny = len(dx), len(dy)
    best: list = [INF, None, None]
    f = [0] * nx

    def assign_g(base: Fraction, cross) -> None:
        g = [0] * ny

        def down(yi: int, cur) -> None:
            if yi == ny:
                best[0] = cur
                best[1] = f.copy()
                best[2] = g.copy()
                return
            for x in range(nx):
                m = cross[yi][x]
                if m < cur:
                    m = cur
                if m >= best[0]:
                    continue
                ok = True
                for yj in range(yi):
                    v = dx[x][g[yj]] - dy[yi][yj]
                    if v < 0:
                        v = -v
                    if v > m:
                        m = v
                        if m >= best[0]:
                            ok = False
                            break
                if ok:
                    g[yi] = x
                    down(yi + 1, m)

        down(0, base)

    def down_f(i: int, cur) -> None:
        if cur >= best[0]:
            return
        if i == nx:
            cross = [[max((abs(dx[j][x] - dy[f[j]][y]) for j in range(nx)),
                          default=Fraction(0))
                      for x in range(nx)] for y in range(ny)]
            assign_g(cur, cross)
            return
        for y in range(ny):
            m = cur
            ok = True
            for j in range(i):
                v = dx[i][j] - dy[y][f[j]]
                if v < 0:
                    v = -v
                if v > m:
                    m = v
                    if m >= best[0]:
                        ok = False
                        break
            if ok:
                f[i] = y
                down_f(i + 1, m)

    down_f(0, Fraction(0))
    return best


def gh_distance_exact(X: FiniteSemiMetric, Y: FiniteSemiMetric,
                      budget: int = GH_BUDGET) -> GHResult:
    """Exact Gromov-Hausdorff distance: half the least distortion over all
    correspondences.  Semi-metric inputs are quotiented first; sizes after
    quotienting must stay within the search budget."""
    for Z in (X, Y):
        if not Z.has_finite_distances():
            raise DomainError("Gromov-Hausdorff search requires finite distances")
    qx, qy = quotient(X), quotient(Y)
    if qx.size > budget or qy.size > budget:
        raise BudgetExceeded(
            f"spaces of sizes {qx.size} and {qy.size} exceed the search budget {budget}")
    value, f, g = _min_distortion(qx.dist, qy.dist)
    pairs = sorted({(x, f[x]) for x in range(qx.size)} | {(g[y], y) for y in range(qy.size)})
    corr = tuple((qx.labels[x], qy.labels[y]) for x, y in pairs)
    return GHResult(Fraction(value) / 2, corr)


def gh_lower_bound(X: FiniteSemiMetric, Y: FiniteSemiMetric) -> Fraction:
    """Half the diameter difference; never exceeds the exact distance."""
    for Z in (X, Y):
        if not Z.has_finite_distances():
            raise DomainError("the diameter bound requires finite distances")
    return abs(Fraction(X.diameter()) - Fraction(Y.diameter())) / 2


# ---------------------------------------------------------------------------
# epsilon-nets and cover-count bounds


@dataclass(frozen=True)
class EpsNet:
    points: tuple[int, ...]
    radius: Fraction


def eps_net(X: FiniteSemiMetric, eps) -> EpsNet:
    """Greedy farthest-point net: start at the first point, repeatedly add
    the farthest uncovered point (ties to the least index) until the closed
    eps-balls around the net cover the space."""
    eps = Fraction(eps) if not is_infinite(eps) else eps
    centers = [0]
    while True:
        farthest = None
        far_d: Value = eps
        for p in range(X.size):
            dmin = min(X.d(p, c) for c in centers)
            if dmin > far_d:
                far_d = dmin
                farthest = p
        if farthest is None:
            return EpsNet(tuple(centers), eps)
        centers.append(farthest)


def _ball_mask(X: FiniteSemiMetric, center: int, eps) -> int:
    mask = 0
    for p in range(X.size):
        if X.d(center, p) <= eps:
            mask |= 1 << p
    return mask


def _exact_min_cover(X: FiniteSemiMetric, eps, cap: int) -> Optional[tuple[int, ...]]:
    full = (1 << X.size) - 1
    masks = [_ball_mask(X, c, eps) for c in range(X.size)]
    for k in range(1, min(cap, X.size) + 1):
        for combo in itertools.combinations(range(X.size), k):
            covered = 0
            for c in combo:
                covered |= masks[c]
            if covered == full:
                return combo
    return None


@dataclass(frozen=True)
class NuBound:
    """A diameter bound n0 and a table of cover counts per radius."""

    n0: int
    table: tuple[tuple[Fraction, int], ...]

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError("n0 must be a positive integer")
        for eps, count in self.table:
            if eps <= 0 or count < 1:
                raise ValueError("cover table entries must be positive")
        object.__setattr__(self, "table", tuple(sorted(self.table)))


@dataclass(frozen=True)
class NuVerdict:
    ok: bool
    diameter: Value
    centers: tuple[tuple[Fraction, tuple[int, ...]], ...]
    failures: tuple[str, ...]


def check_nu_bounded(X: FiniteSemiMetric, nu: NuBound) -> NuVerdict:
    """Whether the diameter is at most n0 and each radius in the table admits
    a cover by at most the allowed number of closed balls.  Greedy nets are
    tried first; small spaces fall back to exact minimum set cover."""
    failures = []
    diam = X.diameter()
    if diam > nu.n0:
        failures.append(f"diameter {format_value(diam)} exceeds n0 = {nu.n0}")
    centers = []
    for eps, cap in nu.table:
        net = eps_net(X, eps)
        if len(net.points) <= cap:
            centers.append((eps, net.points))
            continue
        if X.size > EXACT_COVER_LIMIT:
            raise BudgetExceeded(
                f"greedy cover at radius {eps} needs {len(net.points)} balls and the "
                f"space is too large ({X.size} points) for exact cover search")
        combo = _exact_min_cover(X, eps, cap)
        if combo is None:
            failures.append(f"no cover by {cap} balls of radius {eps}")
        else:
            centers.append((eps, combo))
    return NuVerdict(not failures, diam, tuple(centers), tuple(failures))


# ---------------------------------------------------------------------------
# threshold-relation encodings


@dataclass(frozen=True)
class SemiMetricEncoding:
    """Grid-indexed threshold relations on a point set: relations[k] holds
    the pairs related at threshold grid[k].  Invariant (checked by the axiom
    checker, guaranteed by ``encode``): relations grow along the grid.
    Optional markers name cover centers per grid value."""

    labels: tuple[str, ...]
    grid: tuple[Fraction, ...]
    relations: tuple[frozenset[tuple[int, int]], ...]
    markers: tuple[tuple[int, ...], ...] | None = None


def encode(X: FiniteSemiMetric, grid, markers=None) -> SemiMetricEncoding:
    """The threshold encoding of a space restricted to a finite grid: points
    are related at threshold eps iff their distance is at most eps.  Markers,
    given as a mapping from grid values to point index sequences, are
    attached verbatim."""
    grid = tuple(Fraction(g) for g in grid)
    if not grid:
        raise DomainError("the grid must be nonempty")
    if any(g <= 0 for g in grid) or any(a >= b for a, b in zip(grid, grid[1:])):
        raise DomainError("the grid must be strictly ascending and positive")
    relations = []
    for eps in grid:
        pairs = frozenset((i, j) for i in range(X.size) for j in range(X.size)
                          if X.d(i, j) <= eps)
        relations.append(pairs)
    marker_rows = None
    if markers is not None:
        markers = {Fraction(k): tuple(v) for k, v in markers.items()}
        for eps in markers:
            if eps not in grid:
                raise DomainError(f"marker threshold {eps} is not on the grid")
        marker_rows = tuple(markers.get(eps, ()) for eps in grid)
    return SemiMetricEncoding(X.labels, grid, tuple(relations), marker_rows)


def decode(E: SemiMetricEncoding) -> FiniteSemiMetric:
    """The space an encoding determines: the distance of a pair is the least
    grid threshold relating it, infinite if none does.  Requires monotone
    relations; raises if the decoded map is not a semi-metric."""
    for k in range(len(E.grid) - 1):
        if not E.relations[k] <= E.relations[k + 1]:
            raise DomainError(
                f"relations at thresholds {E.grid[k]} and {E.grid[k + 1]} are not nested")
    n = len(E.labels)
    dist = [[INF] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for eps, rel in zip(E.grid, E.relations):
                if (i, j) in rel:
                    dist[i][j] = eps
                    break
    try:
        return FiniteSemiMetric(E.labels, dist)
    except ValueError as e:
        raise DomainError(f"axiom violation in decoded space: {e}") from None


@dataclass(frozen=True)
class GammaReport:
    ok: bool
    violations: tuple[tuple[str, str], ...]


def check_gamma(E: SemiMetricEncoding) -> GammaReport:
    """Grid instances of the universal axioms: (a) cross symmetry into any
    larger threshold, (b) composition R_eps o R_delta inside R_eta whenever
    eps + delta < eta, (c) reflexivity at every threshold, (d) monotone
    growth along the grid."""
    violations: list[tuple[str, str]] = []
    n = len(E.labels)
    grid = E.grid
    rels = E.relations

    def name(i: int) -> str:
        return E.labels[i]

    for k, rel in enumerate(rels):
        for u in range(n):
            if (u, u) not in rel:
                violations.append(("c", f"R_{grid[k]}({name(u)}, {name(u)}) fails"))
    for a in range(len(grid)):
        for b in range(len(grid)):
            if grid[a] < grid[b]:
                for (u, v) in rels[a]:
                    if (v, u) not in rels[b]:
                        violations.append(
                            ("a", f"R_{grid[a]}({name(u)}, {name(v)}) but not "
                                  f"R_{grid[b]}({name(v)}, {name(u)})"))
                    if (u, v) not in rels[b]:
                        violations.append(
                            ("d", f"R_{grid[a]}({name(u)}, {name(v)}) but not "
                                  f"R_{grid[b]}({name(u)}, {name(v)})"))
    for a, b, c in itertools.product(range(len(grid)), repeat=3):
        if grid[a] + grid[b] < grid[c]:
            for (u, v) in rels[a]:
                for (v2, w) in rels[b]:
                    if v2 == v and (u, w) not in rels[c]:
                        violations.append(
                            ("b", f"R_{grid[a]}({name(u)}, {name(v)}) and "
                                  f"R_{grid[b]}({name(v)}, {name(w)}) but not "
                                  f"R_{grid[c]}({name(u)}, {name(w)})"))
    return GammaReport(not violations, tuple(violations))


def check_gamma_nu(E: SemiMetricEncoding, nu: NuBound) -> GammaReport:
    """The boundedness axioms on an encoding with markers: the relation at
    threshold n0 is total, and at each tabled threshold every point is
    related to some marker, with exactly the allowed number of markers."""
    if E.markers is None:
        raise DomainError("the encoding has no markers")
    n0 = Fraction(nu.n0)
    if n0 not in E.grid:
        raise DomainError(f"threshold n0 = {nu.n0} is not on the encoding grid")
    violations: list[tuple[str, str]] = []
    n = len(E.labels)
    total = E.relations[E.grid.index(n0)]
    for i in range(n):
        for j in range(n):
            if (i, j) not in total:
                violations.append(
                    ("e", f"R_{n0}({E.labels[i]}, {E.labels[j]}) fails"))
    for eps, count in nu.table:
        if eps not in E.grid:
            raise DomainError(f"tabled threshold {eps} is not on the encoding grid")
        k = E.grid.index(eps)
        marks = E.markers[k]
        if len(marks) != count:
            raise DomainError(
                f"{len(marks)} markers at threshold {eps}, but the bound requires {count}")
        rel = E.relations[k]
        for u in range(n):
            if not any((u, c) in rel for c in marks):
                violations.append(
                    ("f", f"{E.labels[u]} is not within {eps} of any marker"))
    return GammaReport(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# the net comparator


@dataclass(frozen=True)
class NetCompareVerdict:
    agree: bool
    bound: Fraction | None
    eps: Fraction
    n0: int
    m: int
    phi_size: int
    mismatches: tuple[str, ...]


def _is_net(X: FiniteSemiMetric, centers: Sequence[int], eps: Fraction) -> bool:
    return all(any(X.d(p, c) <= eps for c in centers) for p in range(X.size))


def net_compare(X: FiniteSemiMetric, Y: FiniteSemiMetric, eps,
                x_markers: Sequence[int], y_markers: Sequence[int],
                n0: int | None = None) -> NetCompareVerdict:
    """Compare two spaces through their nets at the thresholds eps, 2*eps,
    ..., m*eps where m*eps < n0 <= (m+1)*eps.

    If the thresholded relations agree on every marker pair, no threshold
    separates corresponding net distances, so the nets are within eps/2 in
    the Gromov-Hausdorff distance and the spaces within eps + eps/2 + eps =
    5*eps/2.  A mismatch pins a threshold lying strictly between two
    corresponding distances.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if len(x_markers) != len(y_markers):
        raise DomainError("marker lists must share one index set (equal lengths)")
    if not x_markers:
        raise DomainError("marker lists must be nonempty")
    for Z, marks, side in ((X, x_markers, "X"), (Y, y_markers, "Y")):
        if not Z.has_finite_distances():
            raise DomainError("the net comparator requires finite distances")
        if not _is_net(Z, marks, eps):
            raise DomainError(f"markers are not an eps-net of {side}")
    if n0 is None:
        # smallest integer covering both diameters and strictly above eps
        diam = max(Fraction(X.diameter()), Fraction(Y.diameter()))
        n0 = max(math.ceil(diam), math.floor(eps) + 1, 1)
    if Fraction(X.diameter()) > n0 or Fraction(Y.diameter()) > n0:
        raise DomainError(f"a space has diameter above n0 = {n0}")
    if eps >= n0:
        raise DomainError(f"eps = {eps} must be below n0 = {n0}")
    m = -(-n0 // eps) - 1  # the integer with m*eps < n0 <= (m+1)*eps
    m = int(m)
    mismatches = []
    k = len(x_markers)
    for i in range(1, m + 1):
        threshold = i * eps
        for a in range(k):
            for b in range(k):
                in_x = X.d(x_markers[a], x_markers[b]) <= threshold
                in_y = Y.d(y_markers[a], y_markers[b]) <= threshold
                if in_x != in_y:
                    mismatches.append(
                        f"R_{threshold}(c{a}, c{b}): {in_x} in X, {in_y} in Y")
    agree = not mismatches
    bound = Fraction(5, 2) * eps if agree else None
    return NetCompareVerdict(agree, bound, eps, n0, m, m * k * k, tuple(mismatches))
