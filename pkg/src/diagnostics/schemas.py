from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.diagnostics.enums import RegimeTag
from src.problems.schemas import SplitPoint


class RegimeLabel(BaseModel):
    """Converged carries its point, Cycle its period and radius estimates."""

    tag: RegimeTag
    point: Optional[list[float]] = None
    grad_norm: Optional[float] = None
    period: Optional[int] = None
    radius: Optional[float] = None
    recurrence: Optional[float] = Field(None, description="mean recurrence distance at the period")
    cycle_tol: Optional[float] = None


class QuadraticOracle(BaseModel):
    """Closed-form damped-PPM map on the rotational quadratic: each step
    multiplies z by [C·I, −D·I; D·I, C·I]."""

    rho: float
    a: float
    eta: float
    lambda_: float = Field(..., alias="lambda")
    alpha: float
    C: float
    D: float
    factor: float
    converges: bool
    cycles: bool

    model_config = ConfigDict(populate_by_name=True)

    def matrix(self, n: int = 1) -> np.ndarray:
        identity = np.eye(n)
        return np.block([[self.C * identity, -self.D * identity], [self.D * identity, self.C * identity]])


class WeakRegimeReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    z_prime: SplitPoint
    z0: SplitPoint
    mu_local: float
    alpha0: float
    grad_norm: float
    r: Optional[float] = Field(None, description="radius of the inner region")
    R: Optional[float] = Field(None, description="radius of the outer ball")
    psd_ok: bool
    local_ok: bool
    lambda_max: Optional[float] = None
