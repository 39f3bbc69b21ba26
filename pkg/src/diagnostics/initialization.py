from typing import Callable, Optional

import numpy as np

from src.config import LOG, get_settings
from src.diagnostics.schemas import WeakRegimeReport
from src.diagnostics.service import damping_cap
from src.exceptions import ConvergenceFailure, ParameterError
from src.numerics.service import sym_eig_min
from src.problems.models import MinimaxProblem
from src.problems.schemas import SplitPoint, as_vector

ARMIJO = 0.5


def _descend(
    value: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    step: float,
    tol: float,
    max_evals: int,
) -> tuple[np.ndarray, int]:
    """Gradient descent with halving backtracking. Every value or gradient
    evaluation counts against `max_evals`."""
    u = np.array(start, dtype=float)
    fu, g = value(u), grad(u)
    evals = 2
    while np.linalg.norm(g) > tol:
        t = step
        accepted = False
        while evals < max_evals:
            trial = u - t * g
            f_trial = value(trial)
            evals += 1
            if np.isfinite(f_trial) and f_trial <= fu - ARMIJO * t * float(g @ g):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            raise ConvergenceFailure(
                f"block descent used {evals} evaluations, gradient norm {np.linalg.norm(g):.3e}",
                best=u,
                residual=float(np.linalg.norm(g)),
            )
        u, fu = trial, f_trial
        g = grad(u)
        evals += 1
    return u, evals


def init_weak(
    problem: MinimaxProblem,
    z_prime,
    eta: float,
    tol: Optional[float] = None,
    max_evals: Optional[int] = None,
) -> SplitPoint:
    """Blockwise start for the interaction-weak regime: x0 a local minimizer
    of L(·, y') reached by descent from x', and y0 a local maximizer of
    L(x', ·) reached by ascent from y'. 1/η is the first trial step."""
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    settings = get_settings()
    w = as_vector(z_prime)
    x1, y1 = problem.split(w)
    tol = tol if tol is not None else settings.GRAD_TOL_SCALE * max(1.0, problem.grad_norm(w))
    budget = max_evals or settings.INIT_MAX_EVALS

    def join_x(u):
        return np.concatenate([u, y1])

    def join_y(v):
        return np.concatenate([x1, v])

    x0, used = _descend(
        lambda u: problem.value(join_x(u)),
        lambda u: problem.grad_x(join_x(u)),
        x1,
        1.0 / eta,
        tol,
        budget,
    )
    y0, _ = _descend(
        lambda v: -problem.value(join_y(v)),
        lambda v: -problem.grad_y(join_y(v)),
        y1,
        1.0 / eta,
        tol,
        budget - used,
    )
    LOG.info(f"weak-regime start {w.tolist()} -> {np.concatenate([x0, y0]).tolist()}")
    return SplitPoint(x=x0, y=y0)


def weak_regime_check(
    problem: MinimaxProblem,
    z_prime,
    z0,
    eta: float,
    mu_local: Optional[float] = None,
) -> WeakRegimeReport:
    """Dominance lower bound α₀ at the blockwise start z0 and the radii of the
    inner region and outer ball around it.

    μ defaults to the smallest block-Hessian eigenvalue at the block optima,
    floored at zero. α₀ ≤ 0 yields a report with psd_ok false and no radii.
    """
    if problem.H is None or problem.delta is None or problem.xi is None:
        raise ParameterError(f"{problem!r} carries no H, delta and xi constants")
    if not (eta > 0 and eta > problem.rho):
        raise ParameterError(f"eta must be positive and exceed rho={problem.rho}, got {eta}")
    w_prime, w0 = as_vector(z_prime), as_vector(z0)
    x1, y1 = problem.split(w_prime)
    x0, y0 = problem.split(w0)
    rho, beta, H, delta, xi = problem.rho, problem.beta, problem.H, problem.delta, problem.xi

    if mu_local is None:
        curv_x = sym_eig_min(problem.hess_xx(np.concatenate([x0, y1])))
        curv_y = sym_eig_min(-problem.hess_yy(np.concatenate([x1, y0])))
        mu_local = max(0.0, min(curv_x, curv_y))

    Hxy = problem.hess_xy(w0)
    rhs_x = mu_local + sym_eig_min(Hxy @ Hxy.T) / (eta + beta)
    rhs_y = mu_local + sym_eig_min(Hxy.T @ Hxy) / (eta + beta)
    drift_x = xi * float(np.linalg.norm(y0 - y1))
    drift_y = xi * float(np.linalg.norm(x0 - x1))
    alpha0 = min(rhs_x - drift_x, rhs_y - drift_y)
    g = problem.grad_norm(w0)
    common = dict(
        z_prime=SplitPoint(x=x1, y=y1),
        z0=SplitPoint(x=x0, y=y0),
        mu_local=mu_local,
        alpha0=alpha0,
        grad_norm=g,
    )
    if alpha0 <= 0:
        return WeakRegimeReport(**common, psd_ok=False, local_ok=False)

    gap = eta - rho
    half = eta + alpha0 / 2.0
    r = 4.0 * half * g / (alpha0 * gap)
    bracket = 1.0 + 4.0 * np.sqrt(2.0) * half / alpha0 + 4.0 * np.sqrt(2.0) * beta * half / (alpha0 * gap)
    R = bracket * g / gap
    if H == 0:
        local_ok = True
    else:
        allowed = alpha0 * gap / (2.0 * bracket * H * (1.0 + 2.0 * delta / gap + delta**2 / gap**2))
        local_ok = bool(delta * float(np.linalg.norm(w0 - w_prime)) <= allowed)
    return WeakRegimeReport(
        **common,
        r=float(r),
        R=float(R),
        psd_ok=bool(drift_x < rhs_x and drift_y < rhs_y),
        local_ok=local_ok,
        lambda_max=2.0 * damping_cap(eta, rho) / (2.0 * eta / alpha0 + 1.0),
    )
