from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.algorithms.enums import Termination
from src.algorithms.schemas import AlgoConfig
from src.diagnostics.schemas import RegimeLabel
from src.experiments.enums import InitMode, OutputFormat, SweepParameter
from src.problems.schemas import Box, ProblemSpec


class InitSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: InitMode = InitMode.POINTS
    points: list[list[float]] = Field(default_factory=list)
    box: Optional[Box] = None
    resolution: int = Field(5, ge=1)
    offset: float = 0.0
    count: int = Field(10, ge=0, description="number of random starts")
    z_prime: Optional[list[float]] = None

    @model_validator(mode="after")
    def check_mode(self):
        if self.mode in (InitMode.GRID, InitMode.RANDOM) and self.box is None:
            raise ValueError(f"init mode '{self.mode.value}' needs 'box'")
        if self.mode == InitMode.WEAK and self.z_prime is None:
            raise ValueError("init mode 'weak' needs 'z_prime'")
        return self


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Optional[str] = None
    formats: list[OutputFormat] = Field(default_factory=lambda: [OutputFormat.CSV])
    lyapunov: bool = False


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: SweepParameter
    values: list[float] = Field(..., min_length=1)


class ClassifySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    burn_in: Optional[int] = Field(None, ge=0)
    window: Optional[int] = Field(None, ge=3)
    cycle_tol: Optional[float] = Field(None, gt=0)
    grad_tol: Optional[float] = Field(None, gt=0)


class ExperimentConfig(BaseModel):
    """One experiment file: a problem, a scheme, the starting points and
    where the results go. A `sweep` section repeats the runs over a list of
    values of one parameter."""

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "name": "quadratic-damped",
                "problem": {"name": "rotational_quadratic", "params": {"rho": 1.0, "a": 2.0}},
                "algorithm": {"scheme": "ppm", "eta": 3.0, "lambda": 0.5},
                "init": {"mode": "points", "points": [[1.0, 0.0]]},
            }
        },
    )

    name: str = "experiment"
    problem: ProblemSpec
    algorithm: AlgoConfig
    init: InitSpec = Field(default_factory=InitSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    sweep: Optional[SweepSpec] = None
    classify: ClassifySpec = Field(default_factory=ClassifySpec)
    seed: int = 0
    workers: Optional[int] = Field(None, ge=1)


class RunRecord(BaseModel):
    """One summary row: a (parameter value, start point) pair and its outcome."""

    index: int
    parameter: Optional[SweepParameter] = None
    value: Optional[float] = None
    start: list[float]
    regime: RegimeLabel
    termination: Termination
    iterations: int
    final_grad_norm: float
    final_point: list[float]
    contraction: Optional[float] = None
    message: Optional[str] = None
    trajectory_file: Optional[str] = None


class CheckResult(BaseModel):
    name: str
    passed: bool
    slack: float = Field(..., description="bound minus measured value; negative when violated")
    detail: str = ""


class SuiteReport(BaseModel):
    suite: str
    passed: bool
    seed: int
    checks: list[CheckResult]
