from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.algorithms.enums import Scheme, Termination
from src.problems.schemas import Box, SplitPoint

PROX_SCHEMES = {Scheme.PPM, Scheme.PPM2}
STEPSIZE_SCHEMES = {Scheme.GDA, Scheme.AGDA, Scheme.EGM}


class AlgoConfig(BaseModel):
    """Outer scheme and its parameters. Unset tolerances and budgets fall
    back to the settings, scaled at the starting point."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    scheme: Scheme
    eta: Optional[float] = Field(None, gt=0, description="proximal parameter, PPM schemes")
    lambda_: float = Field(1.0, alias="lambda", gt=0, le=1, description="damping, x-damping for PPM2")
    gamma: float = Field(1.0, gt=0, le=1, description="y-damping for PPM2")
    s: Optional[float] = Field(None, gt=0, description="stepsize for GDA, AGDA and EGM")
    eta_x: Optional[float] = Field(None, gt=0)
    eta_y: Optional[float] = Field(None, gt=0)
    box: Optional[Box] = Field(None, description="projection box for the y-block of GDA2")
    max_iter: Optional[int] = Field(None, ge=0)
    grad_tol: Optional[float] = Field(None, gt=0)
    diverge_radius: Optional[float] = Field(None, gt=0)
    inner_tol: Optional[float] = Field(None, gt=0)
    lyapunov: bool = Field(False, description="record the Lyapunov value per step")
    envelope_grad: bool = Field(False, description="record the envelope gradient norm per step")

    @model_validator(mode="after")
    def check_scheme_params(self):
        if self.scheme in PROX_SCHEMES and self.eta is None:
            raise ValueError(f"scheme '{self.scheme.value}' needs 'eta'")
        if self.scheme in STEPSIZE_SCHEMES and self.s is None:
            raise ValueError(f"scheme '{self.scheme.value}' needs 's'")
        if self.scheme == Scheme.GDA2 and (self.eta_x is None or self.eta_y is None):
            raise ValueError("scheme 'gda2' needs 'eta_x' and 'eta_y'")
        if (self.lyapunov or self.envelope_grad) and self.eta is None:
            raise ValueError("recording the Lyapunov or envelope gradient needs 'eta'")
        return self


class Trajectory(BaseModel):
    """Iterates of one run, one row per iterate, with per-iterate diagnostics."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    iterates: np.ndarray
    grad_norm: np.ndarray
    step_norm: np.ndarray
    lyapunov: Optional[np.ndarray] = None
    envelope_grad_norm: Optional[np.ndarray] = None
    config: AlgoConfig
    termination: Termination
    message: Optional[str] = None
    grad_tol: float
    diverge_radius: float
    clamped_steps: int = 0

    @model_validator(mode="after")
    def check_lengths(self):
        k = len(self.iterates)
        columns = [self.grad_norm, self.step_norm, self.lyapunov, self.envelope_grad_norm]
        if any(c is not None and len(c) != k for c in columns):
            raise ValueError("every diagnostic needs one entry per iterate")
        return self

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def point(self, k: int) -> SplitPoint:
        return SplitPoint.from_vector(self.iterates[k], self.n)

    def points(self) -> list[SplitPoint]:
        return [self.point(k) for k in range(len(self.iterates))]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.iterates, axis=1)
