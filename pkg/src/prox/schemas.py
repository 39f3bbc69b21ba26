from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.problems.schemas import ProblemSpec, SplitPoint
from src.prox.enums import InnerMethod


class ProxResult(BaseModel):
    """Solution z₊ of the proximal subproblem centered at a point."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    z_plus: SplitPoint
    residual: float
    inner_iters: int
    eta: float
    tol: float
    method: InnerMethod = InnerMethod.NEWTON
    # successive-step ratios of the GDA iteration and the bound they obey
    step_ratios: list[float] = Field(default_factory=list)
    contraction_bound: Optional[float] = None

    @property
    def vector(self) -> np.ndarray:
        return self.z_plus.stack()


class PartialEnvelopeResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: float
    arg: np.ndarray
    residual: float
    inner_iters: int = 0


class ProxRequest(BaseModel):
    problem: ProblemSpec
    z: list[float]
    eta: float = Field(..., gt=0)
    tol: Optional[float] = Field(None, gt=0)
    method: InnerMethod = InnerMethod.NEWTON

    class Config:
        json_schema_extra = {
            "example": {
                "problem": {"name": "rotational_quadratic", "params": {"rho": 1.0, "a": 2.0}},
                "z": [1.0, 0.0],
                "eta": 3.0,
            }
        }


class ProxResponse(BaseModel):
    x_plus: list[float]
    y_plus: list[float]
    residual: float
    inner_iters: int
    method: InnerMethod
    partial_x: float
    partial_y: float
