from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.problems.schemas import Box, ProblemSpec, SplitPoint
from src.prox.schemas import ProxResult


class DominanceReport(BaseModel):
    """Pointwise interaction-dominance eigenvalues at z."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha_x: float
    alpha_y: float
    eta: float
    z: SplitPoint

    @property
    def alpha(self) -> float:
        return min(self.alpha_x, self.alpha_y)


class BoxDominance(BaseModel):
    """Infimum of pointwise dominance over a sample grid.

    `certified` is true only when the Hessian is constant, so one point
    settles every point; otherwise the numbers are a lower-confidence
    estimate from sampling.
    """

    alpha_x: float
    alpha_y: float
    eta: float
    samples: int
    certified: bool
    box: Box

    @property
    def alpha(self) -> float:
        return min(self.alpha_x, self.alpha_y)


class CurvatureBounds(BaseModel):
    eta: float
    rho: float
    alpha: float
    mu_env: float = Field(..., description="strong convexity of the envelope, (1/η + 1/α)⁻¹")
    beta_env: float = Field(..., description="gradient Lipschitz constant of the envelope")


class EnvelopeGradient(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grad_x: np.ndarray
    grad_y: np.ndarray
    # ∇L at the prox point, equal to the envelope gradient up to the inner residual
    cross_check: np.ndarray
    discrepancy: float

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.grad_x, self.grad_y])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


class EnvelopeHessian(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    xx: np.ndarray
    xy: np.ndarray
    yx: np.ndarray
    yy: np.ndarray
    schur_xx: np.ndarray
    schur_yy: np.ndarray
    schur_gap: float

    @property
    def full(self) -> np.ndarray:
        return np.block([[self.xx, self.xy], [self.yx, self.yy]])


class EnvelopeEvaluation(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: float
    gradient: EnvelopeGradient
    prox: ProxResult


class EnvelopeRequest(BaseModel):
    problem: ProblemSpec
    z: list[float]
    eta: float = Field(..., gt=0)
    tol: Optional[float] = Field(None, gt=0)
    hessian: bool = False


class EnvelopeResponse(BaseModel):
    value: float
    grad: list[float]
    x_plus: list[float]
    y_plus: list[float]
    hessian: Optional[list[list[float]]] = None


class DominanceRequest(BaseModel):
    problem: ProblemSpec
    eta: float = Field(..., gt=0)
    z: Optional[list[float]] = Field(None, description="query point; the problem box is gridded when absent")
    resolution: int = Field(9, ge=2)
