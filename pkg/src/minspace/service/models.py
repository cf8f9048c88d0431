"""Request and response bodies of the certificate service.

Structures, signatures and metric spaces travel as file-format text; exact
rationals travel as strings like ``"1/4"`` so nothing is rounded on the
wire.  Field order is fixed, which keeps serialized reports byte-identical
across runs.
"""
from __future__ import annotations

from pydantic import BaseModel


class ErrorBody(BaseModel):
    code: str
    message: str


class CheckRequest(BaseModel):
    text: str
    kind: str | None = None  # signature | presentation | table | group | metric


class CheckResponse(BaseModel):
    kind: str
    ok: bool
    summary: dict[str, str | int | bool]


class EvalRequest(BaseModel):
    structure: str
    sentence: str


class EvalResponse(BaseModel):
    value: bool


class DistRequest(BaseModel):
    a: str
    b: str
    cap: int = 12
    cutoff: int | None = None


class DistResponse(BaseModel):
    distance: str
    witness_atom: str | None = None
    witness_length: int | None = None
    method: str


class CoverRequest(BaseModel):
    signature: str
    m: int
    budget: int = 22


class CoverType(BaseModel):
    signs: str
    witness_atoms: list[str]


class CoverResponse(BaseModel):
    signature: str
    m: int
    atoms: list[str]
    types: list[CoverType]


class SepRequest(BaseModel):
    signature: str
    k: int
    m: int | None = None


class SepResponse(BaseModel):
    level: int
    cutoff: int
    thetas: list[str]
    witness_atoms: list[list[str]]
    pairwise_separated: bool


class GHRequest(BaseModel):
    x: str
    y: str
    budget: int = 6


class GHResponse(BaseModel):
    gh: str
    correspondence: list[list[str]]


class NetRequest(BaseModel):
    x: str
    eps: str


class NetResponse(BaseModel):
    radius: str
    centers: list[str]
    size: int


class NuBoundRequest(BaseModel):
    x: str
    n0: int
    balls: dict[str, int]


class NuBoundResponse(BaseModel):
    ok: bool
    diameter: str
    centers: dict[str, list[str]]
    failures: list[str]


class EncodeRequest(BaseModel):
    x: str
    grid: list[str]
    markers: dict[str, list[str]] | None = None


class EncodeResponse(BaseModel):
    labels: list[str]
    grid: list[str]
    relations: dict[str, list[list[str]]]
    gamma_ok: bool


class NetcmpRequest(BaseModel):
    x: str
    y: str
    eps: str
    x_markers: list[str]
    y_markers: list[str]
    n0: int | None = None


class NetcmpResponse(BaseModel):
    agree: bool
    bound: str | None
    eps: str
    n0: int
    m: int
    phi_size: int
    mismatches: list[str]


class ConvergeRequest(BaseModel):
    structures: list[str]
    cap: int = 12
    cutoff: int | None = None
    jobs: int = 1


class CauchyEntry(BaseModel):
    start: int
    bound: str


class ConvergeResponse(BaseModel):
    count: int
    distances: list[list[str]]
    cauchy: list[CauchyEntry]


class SelftestRequest(BaseModel):
    seed: int = 0
    triples: int = 20
    spaces: int = 20


class SelftestCheck(BaseModel):
    name: str
    cases: int
    ok: bool


class SelftestResponse(BaseModel):
    seed: int
    ok: bool
    checks: list[SelftestCheck]
