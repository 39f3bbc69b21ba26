from typing import Callable, NamedTuple, Optional

import numpy as np

from src.config import LOG, get_settings
from src.exceptions import ConvergenceFailure, NumericalSingularityError, ParameterError
from src.numerics.service import EPS, solve_linear, spectral_norm
from src.problems.models import MinimaxProblem
from src.problems.schemas import SplitPoint, as_vector
from src.prox.enums import InnerMethod
from src.prox.schemas import PartialEnvelopeResult, ProxResult

ARMIJO = 1e-4
MIN_STEP = 2.0**-30
# ratios of steps below this many ulps of the iterate are round-off
RATIO_FLOOR = 1e8


class _InnerSolution(NamedTuple):
    w: np.ndarray
    residual: float
    iters: int
    method: InnerMethod
    ratios: list[float]
    bound: Optional[float]


def check_eta(problem: MinimaxProblem, eta: float) -> None:
    if problem.rho is None:
        raise ParameterError(f"{problem!r} carries no certified rho")
    if not (np.isfinite(eta) and eta > 0 and eta > problem.rho):
        raise ParameterError(f"eta must be positive and exceed rho={problem.rho}, got {eta}")


def default_inner_tol(problem: MinimaxProblem, z) -> float:
    scale = get_settings().INNER_TOL_SCALE
    return scale * max(1.0, problem.grad_norm(z))


def _hessian_bound(problem: MinimaxProblem, z: np.ndarray) -> float:
    if problem.beta is not None and np.isfinite(problem.beta):
        return problem.beta
    return spectral_norm(problem.hessian(z))


def _solve(
    F: Callable[[np.ndarray], np.ndarray],
    J: Callable[[np.ndarray], np.ndarray],
    w0: np.ndarray,
    signs: np.ndarray,
    mu: float,
    beta_hat: float,
    tol: float,
    max_iter: int,
    method: InnerMethod,
) -> _InnerSolution:
    """Find the root of the gradient field F of a strongly convex-strongly
    concave subproblem.

    Damped Newton on ‖F‖ first. The GDA iteration w ← w − s·signs⊙F(w) with
    s = μ/β̂² takes over when a Newton solve fails or backtracking cannot
    decrease the residual; it contracts by √(1 − 2μs + β̂²s²) per step.
    """
    w = np.array(w0, dtype=float)
    Fw = F(w)
    r = float(np.linalg.norm(Fw))
    iters = 0

    if method == InnerMethod.NEWTON:
        while r > tol and iters < max_iter:
            try:
                d = solve_linear(J(w), -Fw)
            except NumericalSingularityError as e:
                LOG.warning(f"Newton solve failed with error {e.detail}, falling back to GDA")
                break
            t = 1.0
            accepted = False
            while t >= MIN_STEP:
                w_new = w + t * d
                F_new = F(w_new)
                r_new = float(np.linalg.norm(F_new))
                if np.isfinite(r_new) and (r_new <= tol or r_new <= (1.0 - ARMIJO * t) * r):
                    accepted = True
                    break
                t *= 0.5
            iters += 1
            if not accepted:
                LOG.warning(f"Newton backtracking stalled at residual {r:.3e}, falling back to GDA")
                break
            w, Fw, r = w_new, F_new, r_new
        if r <= tol:
            return _InnerSolution(w, r, iters, InnerMethod.NEWTON, [], None)

    s = mu / beta_hat**2
    bound = float(np.sqrt(max(0.0, 1.0 - 2.0 * mu * s + beta_hat**2 * s**2)))
    ratios: list[float] = []
    previous = None
    while r > tol and iters < max_iter:
        step = -s * signs * Fw
        w = w + step
        Fw = F(w)
        r = float(np.linalg.norm(Fw))
        iters += 1
        if not np.isfinite(r):
            break
        size = float(np.linalg.norm(step))
        if previous is not None and previous > RATIO_FLOOR * EPS * max(1.0, float(np.linalg.norm(w))):
            ratios.append(size / previous)
        previous = size

    if not (r <= tol):
        raise ConvergenceFailure(
            f"inner solver stopped at residual {r:.3e} > tol {tol:.3e} after {iters} iterations",
            best=w,
            residual=r,
        )
    return _InnerSolution(w, r, iters, InnerMethod.GDA, ratios, bound)


def inner_solve(
    problem: MinimaxProblem,
    center,
    eta: float,
    tol: float,
    max_iter: Optional[int] = None,
    method: InnerMethod = InnerMethod.NEWTON,
    start=None,
) -> ProxResult:
    """Solve min_u max_v L(u, v) + (η/2)‖u − x‖² − (η/2)‖v − y‖².

    The subproblem is (η − ρ)-strongly convex-strongly concave, so its
    stationary point z₊ is unique. Iterations start from `start`, the center
    by default.
    """
    check_eta(problem, eta)
    if not tol > 0:
        raise ParameterError(f"inner tolerance must be positive, got {tol}")
    max_iter = max_iter or get_settings().INNER_MAX_ITER
    z = as_vector(center)
    n = problem.n
    shift = np.concatenate([np.ones(n), -np.ones(problem.m)])

    def F(w):
        g = problem.grad(w)
        return g + eta * shift * (w - z)

    def J(w):
        return problem.hessian(w) + eta * np.diag(shift)

    w0 = z if start is None else as_vector(start)
    mu = eta - problem.rho
    beta_hat = _hessian_bound(problem, z) + eta
    sol = _solve(F, J, w0, shift, mu, beta_hat, tol, max_iter, method)
    return ProxResult(
        z_plus=SplitPoint(x=sol.w[:n], y=sol.w[n:]),
        residual=sol.residual,
        inner_iters=sol.iters,
        eta=eta,
        tol=tol,
        method=sol.method,
        step_ratios=sol.ratios,
        contraction_bound=sol.bound,
    )


def prox(
    problem: MinimaxProblem,
    z,
    eta: float,
    tol: Optional[float] = None,
    method: InnerMethod = InnerMethod.NEWTON,
) -> ProxResult:
    tol = tol if tol is not None else default_inner_tol(problem, z)
    return inner_solve(problem, z, eta, tol, method=method)


def partial_moreau_x(
    problem: MinimaxProblem,
    z,
    eta: float,
    tol: Optional[float] = None,
    method: InnerMethod = InnerMethod.NEWTON,
) -> PartialEnvelopeResult:
    """min_u L(u, y) + (η/2)‖u − x‖² and its minimizer."""
    check_eta(problem, eta)
    z = as_vector(z)
    tol = tol if tol is not None else default_inner_tol(problem, z)
    x, y = problem.split(z)

    def F(u):
        return problem.grad_x(np.concatenate([u, y])) + eta * (u - x)

    def J(u):
        return problem.hess_xx(np.concatenate([u, y])) + eta * np.eye(problem.n)

    sol = _solve(
        F,
        J,
        x,
        np.ones(problem.n),
        eta - problem.rho,
        _hessian_bound(problem, z) + eta,
        tol,
        get_settings().INNER_MAX_ITER,
        method,
    )
    u = sol.w
    value = problem.value(np.concatenate([u, y])) + 0.5 * eta * float((u - x) @ (u - x))
    return PartialEnvelopeResult(value=value, arg=u, residual=sol.residual, inner_iters=sol.iters)


def partial_moreau_y(
    problem: MinimaxProblem,
    z,
    eta: float,
    tol: Optional[float] = None,
    method: InnerMethod = InnerMethod.NEWTON,
) -> PartialEnvelopeResult:
    """max_v L(x, v) − (η/2)‖v − y‖² and its maximizer."""
    check_eta(problem, eta)
    z = as_vector(z)
    tol = tol if tol is not None else default_inner_tol(problem, z)
    x, y = problem.split(z)

    def F(v):
        return problem.grad_y(np.concatenate([x, v])) - eta * (v - y)

    def J(v):
        return problem.hess_yy(np.concatenate([x, v])) - eta * np.eye(problem.m)

    sol = _solve(
        F,
        J,
        y,
        -np.ones(problem.m),
        eta - problem.rho,
        _hessian_bound(problem, z) + eta,
        tol,
        get_settings().INNER_MAX_ITER,
        method,
    )
    v = sol.w
    value = problem.value(np.concatenate([x, v])) - 0.5 * eta * float((v - y) @ (v - y))
    return PartialEnvelopeResult(value=value, arg=v, residual=sol.residual, inner_iters=sol.iters)
