"""FastAPI service wrapping the operations layer.

The CLI and this service share the handlers in abcalc.ops; domain errors
map to HTTP 422 with a machine-readable error name.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import ops
from ..errors import AbcalcError, SyntaxErrorAt
from ..series import DEFAULT_ORDER
from . import schemas


def _order(value) -> int:
    return value if value is not None else DEFAULT_ORDER


def create_app() -> FastAPI:
    app = FastAPI(
        title="abcalc",
        description="exact calculus for the operator algebra ab - ba = b^2",
    )

    @app.exception_handler(AbcalcError)
    async def domain_error(request: Request, exc: AbcalcError):
        status = 400 if isinstance(exc, SyntaxErrorAt) else 422
        body = {"error": exc.name, "detail": str(exc)}
        if isinstance(exc, SyntaxErrorAt):
            body["position"] = exc.position
        return JSONResponse(status_code=status, content=body)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "default_order": DEFAULT_ORDER}

    @app.post("/eval", response_model=schemas.OperatorResponse)
    def eval_expr(req: schemas.ExprRequest):
        return ops.op_eval(req.expr, _order(req.order))

    @app.post("/mul", response_model=schemas.OperatorResponse)
    def mul(req: schemas.MulRequest):
        return ops.op_mul(req.exprs, _order(req.order))

    @app.post("/divide", response_model=schemas.DivideResponse)
    def divide(req: schemas.DivideRequest):
        return ops.op_divide(req.expr, req.lam, _order(req.order))

    @app.post("/invert")
    def invert(req: schemas.ExprRequest):
        return ops.op_invert(req.expr, _order(req.order))

    @app.post("/module/apply", response_model=schemas.VectorResponse)
    def module_apply(req: schemas.ModuleApplyRequest):
        return ops.op_module_apply(
            req.module.model_dump(), req.expr, req.vector
        )

    @app.post("/module/saturate")
    def module_saturate(req: schemas.ModuleRequest):
        return ops.op_saturate(req.module.model_dump())

    @app.post("/bernstein", response_model=schemas.RootsResponse)
    def bernstein(req: schemas.BernsteinRequest):
        module = req.module.model_dump() if req.module else None
        fresco = req.fresco.model_dump(by_alias=True) if req.fresco else None
        return ops.op_bernstein(module=module, fresco=fresco)

    @app.post("/module/decompose")
    def module_decompose(req: schemas.ModuleRequest):
        return ops.op_decompose(req.module.model_dump())

    @app.post("/module/filtration")
    def module_filtration(req: schemas.FiltrationRequest):
        return ops.op_filtration(req.module.model_dump(), with_steps=req.steps)

    @app.post("/module/embed")
    def module_embed(req: schemas.ModuleRequest):
        return ops.op_embed(req.module.model_dump())

    @app.post("/module/tensor")
    def module_tensor(req: schemas.TensorRequest):
        return ops.op_tensor([req.left.model_dump(), req.right.model_dump()])

    @app.post("/module/solve", response_model=schemas.VectorResponse)
    def module_solve(req: schemas.SolveRequest):
        return ops.op_solve(req.module.model_dump(), req.lam, req.vector)

    @app.post("/fresco/jh")
    def fresco_jh(req: schemas.FrescoRequest):
        return ops.op_jh(req.fresco.model_dump(by_alias=True))

    @app.post("/fresco/higher-bernstein")
    def fresco_higher(req: schemas.FrescoRequest):
        return ops.op_higher_bernstein(req.fresco.model_dump(by_alias=True))

    @app.post("/fresco/semisimple", response_model=schemas.SemisimpleResponse)
    def fresco_semisimple(req: schemas.FrescoRequest):
        return ops.op_semisimple(req.fresco.model_dump(by_alias=True))

    @app.post("/fresco/pole-report")
    def fresco_pole_report(req: schemas.FrescoRequest):
        return ops.op_pole_report(req.fresco.model_dump(by_alias=True))

    return app


app = create_app()
