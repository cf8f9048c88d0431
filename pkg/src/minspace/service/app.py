"""The certificate service: one POST endpoint per operation.

Parse failures map to 422, domain failures to 400, both with a
machine-readable error code in the body.
"""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import MinspaceError, ParseError
from . import models, ops


def create_app() -> FastAPI:
    app = FastAPI(
        title="minspace",
        description="Certificates for the space of minimal structures and "
                    "exact finite metric geometry.",
        version="0.1.0")

    @app.exception_handler(MinspaceError)
    async def _minspace_error(request: Request, exc: MinspaceError):
        status = 422 if isinstance(exc, ParseError) else 400
        return JSONResponse(status_code=status, content={"error": exc.as_dict()})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/check", response_model=models.CheckResponse)
    def check(req: models.CheckRequest):
        return ops.check(req)

    @app.post("/eval", response_model=models.EvalResponse)
    def eval_sentence(req: models.EvalRequest):
        return ops.eval_sentence(req)

    @app.post("/dist", response_model=models.DistResponse)
    def dist(req: models.DistRequest):
        return ops.dist(req)

    @app.post("/cover", response_model=models.CoverResponse)
    def cover(req: models.CoverRequest):
        return ops.cover(req)

    @app.post("/sep", response_model=models.SepResponse)
    def sep(req: models.SepRequest):
        return ops.sep(req)

    @app.post("/gh", response_model=models.GHResponse)
    def gh(req: models.GHRequest):
        return ops.gh_exact(req)

    @app.post("/net", response_model=models.NetResponse)
    def net(req: models.NetRequest):
        return ops.net(req)

    @app.post("/nubound", response_model=models.NuBoundResponse)
    def nubound(req: models.NuBoundRequest):
        return ops.nubound(req)

    @app.post("/encode", response_model=models.EncodeResponse)
    def encode(req: models.EncodeRequest):
        return ops.encode(req)

    @app.post("/netcmp", response_model=models.NetcmpResponse)
    def netcmp(req: models.NetcmpRequest):
        return ops.netcmp(req)

    @app.post("/converge", response_model=models.ConvergeResponse)
    def converge(req: models.ConvergeRequest):
        return ops.converge(req)

    @app.post("/selftest", response_model=models.SelftestResponse)
    def selftest(req: models.SelftestRequest):
        return ops.selftest(req)

    return app


app = create_app()
