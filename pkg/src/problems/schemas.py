import itertools
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.problems.enums import ProblemName


def as_vector(z) -> np.ndarray:
    """Stacked float vector (x, y) from a SplitPoint or any array-like."""
    if isinstance(z, SplitPoint):
        return z.stack()
    return np.asarray(z, dtype=float).ravel()


class SplitPoint(BaseModel):
    """A point z = (x, y) with the min block x and the max block y."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: np.ndarray
    y: np.ndarray

    @field_validator("x", "y", mode="before")
    @classmethod
    def check_finite(cls, value):
        v = np.atleast_1d(np.asarray(value, dtype=float)).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("point has non-finite entries")
        return v

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def m(self) -> int:
        return self.y.size

    def stack(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_vector(cls, v, n: int) -> "SplitPoint":
        v = np.asarray(v, dtype=float).ravel()
        return cls(x=v[:n], y=v[n:])

    def norm(self) -> float:
        return float(np.linalg.norm(self.stack()))


class Box(BaseModel):
    """Axis-aligned box given by per-coordinate bounds."""

    lower: list[float]
    upper: list[float]

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same length")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("every lower bound must not exceed its upper bound")
        return self

    @classmethod
    def cube(cls, low: float, high: float, dim: int) -> "Box":
        return cls(lower=[low] * dim, upper=[high] * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    def contains(self, v, tol: float = 0.0) -> bool:
        lo, hi = self.bounds()
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= lo - tol) and np.all(v <= hi + tol))

    def clip(self, v) -> np.ndarray:
        lo, hi = self.bounds()
        return np.clip(np.asarray(v, dtype=float), lo, hi)

    def grid(self, resolution: int, offset: float = 0.0) -> np.ndarray:
        """Uniform grid, row-major over the coordinates, shifted by `offset`.

        One row per grid point. Resolution 1 gives the box center.
        """
        if resolution < 1:
            raise ValueError("grid resolution must be at least 1")
        lo, hi = self.bounds()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("cannot grid an unbounded box")
        if resolution == 1:
            axes = [np.array([0.5 * (a + b)]) for a, b in zip(lo, hi)]
        else:
            axes = [np.linspace(a, b, resolution) for a, b in zip(lo, hi)]
        points = np.array(list(itertools.product(*axes)), dtype=float)
        return points + offset

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo, hi = self.bounds()
        return rng.uniform(lo, hi, size=(count, self.dim))


class ProblemSpec(BaseModel):
    name: ProblemName = Field(..., description="Registered problem family")
    params: dict[str, Any] = Field(default_factory=dict)

    class Config:
        json_schema_extra = {
            "example": {"name": "figure1", "params": {"a": 10.0}},
        }


class FigureOneParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: float = Field(..., allow_inf_nan=False)


class RotationalQuadraticParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rho: float = Field(..., allow_inf_nan=False)
    a: float = Field(..., allow_inf_nan=False)
    n: int = Field(1, ge=1)


class CoupledSeparableParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    f_coeffs: list[float] = Field(..., min_length=1)
    g_coeffs: list[float] = Field(..., min_length=1)
    a: Optional[float] = Field(None, description="Scalar coupling, A = a·I")
    A: Optional[list[list[float]]] = Field(None, description="Dense coupling matrix")
    n: int = Field(1, ge=1)
    m: int = Field(1, ge=1)
    box: Optional[Box] = None

    @model_validator(mode="after")
    def check_coupling(self):
        if (self.a is None) == (self.A is None):
            raise ValueError("exactly one of 'a' and 'A' must be given")
        if self.a is not None and self.n != self.m:
            raise ValueError("scalar coupling needs n == m")
        if self.A is not None:
            A = np.asarray(self.A, dtype=float)
            if A.shape != (self.n, self.m):
                raise ValueError(f"A must have shape ({self.n}, {self.m})")
        return self


class ProblemConstants(BaseModel):
    rho: Optional[float]
    beta: Optional[float]
    H: Optional[float] = None
    delta: Optional[float] = None
    xi: Optional[float] = None
    box: Optional[Box] = None
    constant_hessian: bool = False


class ConstantsCheck(BaseModel):
    """Sampled audit of the certified rho and beta."""

    samples: int
    curvature_slack: float = Field(..., description="min over samples of λmin + rho")
    smoothness_slack: float = Field(..., description="min over samples of beta − ‖∇²L‖")
    ok: bool


class EvaluateRequest(BaseModel):
    problem: ProblemSpec
    z: list[float]


class EvaluateResponse(BaseModel):
    value: float
    grad_x: list[float]
    grad_y: list[float]
    hessian: list[list[float]]
    constants: ProblemConstants
