from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ValidationError

from src.config import LOG
from src.exceptions import ConfigError, ParameterError
from src.numerics.service import (
    GRAD_STEP_EXPONENT,
    HESS_STEP_EXPONENT,
    central_gradient,
    central_jacobian,
    spectral_norm,
    sym_eig_min,
)
from src.problems.enums import ProblemName
from src.problems.models import (
    CoupledSeparable,
    FiniteDifferenceProblem,
    MinimaxProblem,
    RotationalQuadratic,
)
from src.problems.schemas import (
    Box,
    ConstantsCheck,
    CoupledSeparableParams,
    EvaluateRequest,
    EvaluateResponse,
    FigureOneParams,
    ProblemSpec,
    RotationalQuadraticParams,
)

# f(x) = g(x) = (x+3)(x+1)(x-1)(x-3), ascending degree
FIGURE1_COEFFS = (9.0, 0.0, -10.0, 0.0, 1.0)
FIGURE1_BOX = Box.cube(-4.0, 4.0, 2)

# sampling region for problems certified globally
DEFAULT_SAMPLE_HALF_WIDTH = 4.0


def make_figure1_problem(a: float) -> CoupledSeparable:
    if not np.isfinite(a):
        raise ParameterError(f"interaction coefficient must be finite, got {a}")
    return CoupledSeparable(FIGURE1_COEFFS, FIGURE1_COEFFS, [[float(a)]], FIGURE1_BOX)


def finite_diff_problem(
    value_fn: Callable[[np.ndarray, np.ndarray], float],
    n: int,
    m: int,
    h_policy: Optional[tuple[float, float]] = None,
    rho: Optional[float] = None,
    beta: Optional[float] = None,
    box: Optional[Box] = None,
) -> FiniteDifferenceProblem:
    """`h_policy` is the pair of step exponents (gradient, Hessian)."""
    grad_exponent, hess_exponent = h_policy or (GRAD_STEP_EXPONENT, HESS_STEP_EXPONENT)
    return FiniteDifferenceProblem(
        value_fn,
        n,
        m,
        grad_exponent=grad_exponent,
        hess_exponent=hess_exponent,
        rho=rho,
        beta=beta,
        box=box,
    )


def _validated(model: type[BaseModel], params: dict, prefix: str) -> BaseModel:
    try:
        return model.model_validate(params)
    except ValidationError as e:
        err = e.errors()[0]
        key = ".".join(str(part) for part in (prefix, *err["loc"]))
        raise ConfigError(f"invalid value for '{key}': {err['msg']}") from e


def build_problem(spec: ProblemSpec, prefix: str = "problem.params") -> MinimaxProblem:
    """Resolve a problem spec (name + parameter map) to a problem object."""
    if spec.name == ProblemName.FIGURE1:
        p = _validated(FigureOneParams, spec.params, prefix)
        return make_figure1_problem(p.a)

    if spec.name == ProblemName.ROTATIONAL_QUADRATIC:
        p = _validated(RotationalQuadraticParams, spec.params, prefix)
        return RotationalQuadratic(rho=p.rho, a=p.a, n=p.n)

    if spec.name == ProblemName.COUPLED_SEPARABLE:
        p = _validated(CoupledSeparableParams, spec.params, prefix)
        A = p.a * np.eye(p.n) if p.a is not None else np.asarray(p.A, dtype=float)
        box = p.box or Box.cube(-DEFAULT_SAMPLE_HALF_WIDTH, DEFAULT_SAMPLE_HALF_WIDTH, p.n + p.m)
        return CoupledSeparable(p.f_coeffs, p.g_coeffs, A, box)

    raise ConfigError(f"unknown problem '{spec.name}'")


def sample_box(problem: MinimaxProblem) -> Box:
    if problem.box is not None:
        return problem.box
    return Box.cube(-DEFAULT_SAMPLE_HALF_WIDTH, DEFAULT_SAMPLE_HALF_WIDTH, problem.dim)


def check_certified_constants(
    problem: MinimaxProblem, rng: np.random.Generator, samples: int = 100, tol: float = 1e-9
) -> ConstantsCheck:
    if problem.rho is None or problem.beta is None:
        raise ParameterError(f"{problem!r} carries no certified rho and beta")
    curvature_slack = np.inf
    smoothness_slack = np.inf
    for z in sample_box(problem).sample(rng, samples):
        lowest = min(sym_eig_min(problem.hess_xx(z)), sym_eig_min(-problem.hess_yy(z)))
        curvature_slack = min(curvature_slack, lowest + problem.rho)
        smoothness_slack = min(smoothness_slack, problem.beta - spectral_norm(problem.hessian(z)))
    scale = max(1.0, abs(problem.beta))
    ok = bool(curvature_slack >= -tol * scale and smoothness_slack >= -tol * scale)
    if not ok:
        LOG.warning(f"certified constants of {problem!r} violated at sampled points")
    return ConstantsCheck(
        samples=samples,
        curvature_slack=float(curvature_slack),
        smoothness_slack=float(smoothness_slack),
        ok=ok,
    )


def gradient_fd_error(problem: MinimaxProblem, z) -> float:
    """Relative error of the analytic gradient against central differences of value."""
    z = np.asarray(z, dtype=float)
    analytic = problem.grad(z)
    numeric = central_gradient(problem.value, z)
    return float(np.linalg.norm(analytic - numeric) / max(1.0, np.linalg.norm(analytic)))


def hessian_fd_error(problem: MinimaxProblem, z) -> float:
    """Relative error of the analytic Hessian against differences of the gradient."""
    z = np.asarray(z, dtype=float)
    analytic = problem.hessian(z)
    numeric = central_jacobian(problem.grad, z)
    return float(np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(analytic))))


def evaluate(request: EvaluateRequest) -> EvaluateResponse:
    problem = build_problem(request.problem)
    z = np.asarray(request.z, dtype=float)
    if z.size != problem.dim:
        raise ParameterError(f"point has {z.size} entries, problem expects {problem.dim}")
    return EvaluateResponse(
        value=problem.value(z),
        grad_x=problem.grad_x(z).tolist(),
        grad_y=problem.grad_y(z).tolist(),
        hessian=problem.hessian(z).tolist(),
        constants=problem.constants(),
    )
