"""Service operations: parse request texts, run the library, build response
models.  The FastAPI endpoints and the CLI both call these functions, so a
local CLI run and a remote service produce identical reports.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .. import gromov_hausdorff as gh
from .. import sampling, stone_space, structures, syntax, term_model, ultrametric
from ..errors import DomainError, ParseError
from . import models


def _load(text: str) -> structures.MinimalStructure:
    return structures.load_structure(text)


def _load_metric(text: str) -> gh.FiniteSemiMetric:
    return gh.parse_metric(text)


def _detect_kind(text: str) -> str:
    stripped = text.lstrip()
    for keyword, kind in (("group", "group"), ("universe", "table")):
        if stripped.startswith(keyword):
            return kind
    head = stripped.split(None, 1)[0] if stripped else ""
    if head in ("const", "fn", "rel"):
        return "presentation" if "atom" in text else "signature"
    return "metric"


def check(req: models.CheckRequest) -> models.CheckResponse:
    kind = req.kind or _detect_kind(req.text)
    summary: dict = {}
    if kind == "signature":
        sig = syntax.parse_signature(req.text)
        summary = {
            "families": len(sig.families),
            "locally_finite": sig.is_locally_finite(),
        }
    elif kind == "presentation":
        pres = term_model.parse_presentation(req.text)
        summary = {
            "families": len(pres.sig.families),
            "atoms": len(pres.atoms),
            "locally_finite": pres.sig.is_locally_finite(),
        }
    elif kind == "table":
        table = structures.parse_finite_table(req.text)
        summary = {
            "universe": table.size,
            "minimal": structures.is_minimal(table),
        }
    elif kind == "group":
        group = structures.parse_group(req.text)
        summary = {
            "backend": group.describe(),
            "markers": len(group.markers),
        }
    elif kind == "metric":
        space = _load_metric(req.text)
        summary = {
            "points": space.size,
            "metric": space.is_metric(),
            "diameter": gh.format_value(space.diameter()),
        }
    else:
        raise DomainError(f"unknown input kind {kind!r}")
    return models.CheckResponse(kind=kind, ok=True, summary=summary)


def eval_sentence(req: models.EvalRequest) -> models.EvalResponse:
    M = _load(req.structure)
    phi = syntax.parse_sentence(req.sentence, M.sig)
    return models.EvalResponse(value=stone_space.evaluate(phi, M))


def _distance_response(d: ultrametric.Distance) -> models.DistResponse:
    if isinstance(d, ultrametric.ExactOneOver):
        return models.DistResponse(
            distance=ultrametric.format_distance(d),
            witness_atom=syntax.print_atom(d.witness),
            witness_length=syntax.atom_length(d.witness),
            method="first-disagreement")
    if isinstance(d, ultrametric.ExactZero):
        return models.DistResponse(
            distance="0", witness_atom=None, witness_length=None,
            method=f"certificate:{d.certificate}")
    return models.DistResponse(
        distance=ultrametric.format_distance(d), witness_atom=None,
        witness_length=None, method="agreement-cap")


def dist(req: models.DistRequest) -> models.DistResponse:
    M, N = _load(req.a), _load(req.b)
    return _distance_response(ultrametric.distance(M, N, req.cap, req.cutoff))


def cover(req: models.CoverRequest) -> models.CoverResponse:
    sig = syntax.parse_signature(req.signature)
    cert = stone_space.cover_certificate(sig, req.m, req.budget)
    return models.CoverResponse(
        signature=syntax.print_signature(sig).strip(),
        m=cert.m,
        atoms=[syntax.print_atom(a) for a in cert.atoms],
        types=[models.CoverType(
            signs=t.sign_string(),
            witness_atoms=[syntax.print_atom(a) for a in t.witness.atoms])
            for t in cert.types])


def sep(req: models.SepRequest) -> models.SepResponse:
    sig = syntax.parse_signature(req.signature)
    family = stone_space.separated_family(sig, req.k, req.m)
    ok = True
    for i in range(len(family.structures)):
        for j in range(i + 1, len(family.structures)):
            if ultrametric.m_close(family.structures[i], family.structures[j],
                                   family.level, cutoff=family.cutoff):
                ok = False
    return models.SepResponse(
        level=family.level,
        cutoff=family.cutoff,
        thetas=[syntax.print_atom(t) for t in family.thetas],
        witness_atoms=[[syntax.print_atom(a) for a in s.presentation.atoms]
                       for s in family.structures],
        pairwise_separated=ok)


def gh_exact(req: models.GHRequest) -> models.GHResponse:
    X, Y = _load_metric(req.x), _load_metric(req.y)
    result = gh.gh_distance_exact(X, Y, req.budget)
    return models.GHResponse(
        gh=str(result.value),
        correspondence=[[a, b] for a, b in result.correspondence])


def net(req: models.NetRequest) -> models.NetResponse:
    X = _load_metric(req.x)
    result = gh.eps_net(X, gh.parse_value(req.eps))
    return models.NetResponse(
        radius=str(result.radius),
        centers=[X.labels[i] for i in result.points],
        size=len(result.points))


def nubound(req: models.NuBoundRequest) -> models.NuBoundResponse:
    X = _load_metric(req.x)
    table = tuple((Fraction(gh.parse_value(eps)), count) for eps, count in req.balls.items())
    try:
        nu = gh.NuBound(req.n0, table)
    except ValueError as e:
        raise DomainError(str(e)) from None
    verdict = gh.check_nu_bounded(X, nu)
    return models.NuBoundResponse(
        ok=verdict.ok,
        diameter=gh.format_value(verdict.diameter),
        centers={str(eps): [X.labels[i] for i in pts] for eps, pts in verdict.centers},
        failures=list(verdict.failures))


def encode(req: models.EncodeRequest) -> models.EncodeResponse:
    X = _load_metric(req.x)
    markers = None
    if req.markers is not None:
        markers = {gh.parse_value(eps): tuple(X.index_of(l) for l in labels)
                   for eps, labels in req.markers.items()}
    E = gh.encode(X, [gh.parse_value(g) for g in req.grid], markers)
    relations = {}
    for eps, rel in zip(E.grid, E.relations):
        relations[str(eps)] = sorted([E.labels[i], E.labels[j]] for i, j in rel)
    return models.EncodeResponse(
        labels=list(E.labels),
        grid=[str(g) for g in E.grid],
        relations=relations,
        gamma_ok=gh.check_gamma(E).ok)


def netcmp(req: models.NetcmpRequest) -> models.NetcmpResponse:
    X, Y = _load_metric(req.x), _load_metric(req.y)
    verdict = gh.net_compare(
        X, Y, gh.parse_value(req.eps),
        [X.index_of(l) for l in req.x_markers],
        [Y.index_of(l) for l in req.y_markers],
        req.n0)
    return models.NetcmpResponse(
        agree=verdict.agree,
        bound=None if verdict.bound is None else str(verdict.bound),
        eps=str(verdict.eps),
        n0=verdict.n0,
        m=verdict.m,
        phi_size=verdict.phi_size,
        mismatches=list(verdict.mismatches))


def converge(req: models.ConvergeRequest) -> models.ConvergeResponse:
    """Pairwise distance table for a sequence of structures, plus for each
    tail of the sequence the largest certified distance bound among its
    pairs.  Each worker re-parses its own structures, so closures are never
    shared across threads."""
    texts = req.structures
    n = len(texts)
    if n < 2:
        raise DomainError("converge needs at least two structures")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def compute(pair):
        i, j = pair
        M, N = _load(texts[i]), _load(texts[j])
        return pair, ultrametric.distance(M, N, req.cap, req.cutoff)

    if req.jobs > 1:
        with ThreadPoolExecutor(max_workers=req.jobs) as pool:
            results = dict(pool.map(compute, pairs))
    else:
        results = dict(map(compute, pairs))

    table = [["0"] * n for _ in range(n)]
    for (i, j), d in results.items():
        table[i][j] = table[j][i] = ultrametric.format_distance(d)
    cauchy = []
    for start in range(n - 1):
        bound = max(ultrametric.upper_value(results[(i, j)])
                    for i in range(start, n) for j in range(i + 1, n))
        cauchy.append(models.CauchyEntry(start=start, bound=str(bound)))
    return models.ConvergeResponse(count=n, distances=table, cauchy=cauchy)


def selftest(req: models.SelftestRequest) -> models.SelftestResponse:
    """Randomized property checks: the strong triangle inequality for the
    structure distance, the triangle inequality for exact GH on small
    rational spaces, and decode-encode round trips on grid-exact spaces."""
    rng = random.Random(req.seed)
    checks = []

    ok = True
    for _ in range(req.triples):
        sig = rng.choice(sampling.SIGNATURE_POOL)
        triple = tuple(sampling.sample_structure(rng, sig) for _ in range(3))
        report = ultrametric.check_semi_ultrametric([triple], m_cap=8)[0]
        ok = ok and report.ok
    checks.append(models.SelftestCheck(name="ultrametric-triangle", cases=req.triples, ok=ok))

    ok = True
    for _ in range(req.spaces):
        spaces = [sampling.sample_metric(rng, rng.randint(1, 4)) for _ in range(3)]
        d01 = gh.gh_distance_exact(spaces[0], spaces[1]).value
        d12 = gh.gh_distance_exact(spaces[1], spaces[2]).value
        d02 = gh.gh_distance_exact(spaces[0], spaces[2]).value
        ok = ok and d02 <= d01 + d12
    checks.append(models.SelftestCheck(name="gh-triangle", cases=req.spaces, ok=ok))

    ok = True
    for _ in range(req.spaces):
        X = sampling.sample_metric(rng, rng.randint(2, 5))
        grid = sorted({Fraction(v) for row in X.dist for v in row if v != 0})
        if not grid:
            continue
        decoded = gh.decode(gh.encode(X, grid))
        ok = ok and decoded.dist == X.dist
    checks.append(models.SelftestCheck(name="encode-decode", cases=req.spaces, ok=ok))

    return models.SelftestResponse(seed=req.seed, ok=all(c.ok for c in checks), checks=checks)
