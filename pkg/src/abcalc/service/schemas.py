"""Pydantic request/response models for the HTTP service.

Rationals are strings ("p/q" or "p"); series are arrays of those with the
index giving the b-power.
"""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field

Series = List[str]


class ModuleModel(BaseModel):
    rank: int
    b_order: int
    amat: List[List[Series]]


class FactorModel(BaseModel):
    lam: str = Field(alias="lambda")
    T: Series

    model_config = {"populate_by_name": True}


class FrescoModel(BaseModel):
    b_order: int
    factors: List[FactorModel]


class ExprRequest(BaseModel):
    expr: str
    order: Optional[int] = None


class MulRequest(BaseModel):
    exprs: List[str]
    order: Optional[int] = None


class DivideRequest(BaseModel):
    expr: str
    lam: str = Field(alias="lambda")
    order: Optional[int] = None

    model_config = {"populate_by_name": True}


class ModuleRequest(BaseModel):
    module: ModuleModel


class ModuleApplyRequest(BaseModel):
    module: ModuleModel
    expr: str
    vector: List[Series]


class SolveRequest(BaseModel):
    module: ModuleModel
    lam: str = Field(alias="lambda")
    vector: List[Series]

    model_config = {"populate_by_name": True}


class TensorRequest(BaseModel):
    left: ModuleModel
    right: ModuleModel


class FiltrationRequest(BaseModel):
    module: ModuleModel
    steps: bool = False


class FrescoRequest(BaseModel):
    fresco: FrescoModel


class BernsteinRequest(BaseModel):
    module: Optional[ModuleModel] = None
    fresco: Optional[FrescoModel] = None


class OperatorResponse(BaseModel):
    result: str
    order: int


class DivideResponse(BaseModel):
    Q: str
    R: str


class RootsResponse(BaseModel):
    roots: List[str]


class VectorResponse(BaseModel):
    vector: List[Series]


class SemisimpleResponse(BaseModel):
    semisimple: bool
