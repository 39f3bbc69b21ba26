from typing import Callable, Optional

import numpy as np

from src.algorithms.enums import Scheme, Termination
from src.algorithms.schemas import PROX_SCHEMES, AlgoConfig, Trajectory
from src.config import LOG, get_settings
from src.diagnostics.service import lyapunov
from src.envelope.service import envelope_grad
from src.exceptions import ParameterError, SaddleError
from src.problems.models import MinimaxProblem
from src.problems.schemas import Box, as_vector
from src.prox.service import check_eta, prox

Stepper = Callable[[np.ndarray], tuple[np.ndarray, bool]]


def _flip(problem: MinimaxProblem) -> np.ndarray:
    return np.concatenate([np.ones(problem.n), -np.ones(problem.m)])


def _check_damping(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")


def ppm_step(
    problem: MinimaxProblem, z, eta: float, lam: float, tol: Optional[float] = None
) -> np.ndarray:
    """(1 − λ)z + λ·prox_η(z), returned stacked as (x, y)."""
    _check_damping("lambda", lam)
    z = as_vector(z)
    z_plus = prox(problem, z, eta, tol).vector
    return (1.0 - lam) * z + lam * z_plus


def ppm2_step(
    problem: MinimaxProblem, z, eta: float, lam: float, gamma: float, tol: Optional[float] = None
) -> np.ndarray:
    """Damps the x-block by λ and the y-block by γ."""
    _check_damping("lambda", lam)
    _check_damping("gamma", gamma)
    z = as_vector(z)
    z_plus = prox(problem, z, eta, tol).vector
    weights = np.concatenate([np.full(problem.n, lam), np.full(problem.m, gamma)])
    return (1.0 - weights) * z + weights * z_plus


def gda_step(problem: MinimaxProblem, z, s: float) -> np.ndarray:
    if not s > 0:
        raise ParameterError(f"stepsize must be positive, got {s}")
    z = as_vector(z)
    return z - s * _flip(problem) * problem.grad(z)


def default_projection_box(m: int) -> Box:
    return Box.cube(-1e6, 1e6, m)


def gda2_step(
    problem: MinimaxProblem, z, eta_x: float, eta_y: float, box: Optional[Box] = None
) -> tuple[np.ndarray, bool]:
    """x − ∇ₓL/η_x, and y + ∇ᵧL/η_y projected onto `box`. The flag reports
    whether the projection moved y."""
    if not (eta_x > 0 and eta_y > 0):
        raise ParameterError(f"eta_x and eta_y must be positive, got {eta_x}, {eta_y}")
    box = box or default_projection_box(problem.m)
    if box.dim != problem.m:
        raise ParameterError(f"projection box has dimension {box.dim}, y has {problem.m}")
    x, y = problem.split(z)
    g = problem.grad(z)
    x_new = x - g[: problem.n] / eta_x
    y_free = y + g[problem.n :] / eta_y
    y_new = box.clip(y_free)
    return np.concatenate([x_new, y_new]), bool(np.any(y_new != y_free))


def agda_step(problem: MinimaxProblem, z, s: float) -> np.ndarray:
    """x' = x − s∇ₓL(x, y), then y' = y + s∇ᵧL(x', y)."""
    if not s > 0:
        raise ParameterError(f"stepsize must be positive, got {s}")
    x, y = problem.split(z)
    x_new = x - s * problem.grad_x(np.concatenate([x, y]))
    y_new = y + s * problem.grad_y(np.concatenate([x_new, y]))
    return np.concatenate([x_new, y_new])


def egm_step(problem: MinimaxProblem, z, s: float) -> np.ndarray:
    """Extragradient: a lookahead GDA step, then a GDA step from z using the
    gradient at the lookahead point."""
    if not s > 0:
        raise ParameterError(f"stepsize must be positive, got {s}")
    z = as_vector(z)
    flip = _flip(problem)
    z_half = z - s * flip * problem.grad(z)
    return z - s * flip * problem.grad(z_half)


def make_stepper(problem: MinimaxProblem, config: AlgoConfig) -> Stepper:
    scheme = config.scheme
    if scheme in PROX_SCHEMES:
        check_eta(problem, config.eta)
    if scheme == Scheme.PPM:
        return lambda z: (ppm_step(problem, z, config.eta, config.lambda_, config.inner_tol), False)
    if scheme == Scheme.PPM2:
        return lambda z: (
            ppm2_step(problem, z, config.eta, config.lambda_, config.gamma, config.inner_tol),
            False,
        )
    if scheme == Scheme.GDA:
        return lambda z: (gda_step(problem, z, config.s), False)
    if scheme == Scheme.GDA2:
        box = config.box or default_projection_box(problem.m)
        return lambda z: gda2_step(problem, z, config.eta_x, config.eta_y, box)
    if scheme == Scheme.AGDA:
        return lambda z: (agda_step(problem, z, config.s), False)
    if scheme == Scheme.EGM:
        return lambda z: (egm_step(problem, z, config.s), False)
    raise ParameterError(f"unknown scheme '{scheme}'")


def run(problem: MinimaxProblem, config: AlgoConfig, z0) -> Trajectory:
    """Iterate a scheme from z0 until ‖∇L‖ ≤ grad_tol, ‖z‖ > diverge_radius
    or the iteration budget runs out.

    A non-finite iterate counts as divergence. Errors raised by a step end
    the run with termination `failed` and the error detail as message.
    """
    settings = get_settings()
    z = as_vector(z0).copy()
    if z.size != problem.dim:
        raise ParameterError(f"start point has {z.size} entries, problem expects {problem.dim}")
    if (config.lyapunov or config.envelope_grad) and config.eta is not None:
        check_eta(problem, config.eta)

    g0 = problem.grad_norm(z)
    grad_tol = config.grad_tol or settings.GRAD_TOL_SCALE * max(1.0, g0)
    radius = config.diverge_radius or settings.DIVERGE_SCALE * (1.0 + float(np.linalg.norm(z)))
    max_iter = settings.MAX_ITER if config.max_iter is None else config.max_iter
    step = make_stepper(problem, config)

    def lyapunov_at(w):
        return lyapunov(problem, w, config.eta, config.inner_tol)

    def envelope_norm_at(w):
        return envelope_grad(problem, w, config.eta, config.inner_tol).norm()

    iterates = [z]
    grads = [g0]
    steps = [0.0]
    lyap = [lyapunov_at(z)] if config.lyapunov else None
    env = [envelope_norm_at(z)] if config.envelope_grad else None
    clamped = 0
    termination = Termination.BUDGET
    message = None

    for _ in range(max_iter):
        if grads[-1] <= grad_tol:
            termination = Termination.CONVERGED
            break
        try:
            z_next, was_clamped = step(z)
        except SaddleError as e:
            termination, message = Termination.FAILED, e.detail
            break
        if not np.all(np.isfinite(z_next)):
            termination, message = Termination.DIVERGED, "non-finite iterate"
            break
        g = problem.grad_norm(z_next)
        if not np.isfinite(g):
            termination, message = Termination.DIVERGED, "non-finite gradient"
            break
        clamped += int(was_clamped)
        iterates.append(z_next)
        grads.append(g)
        steps.append(float(np.linalg.norm(z_next - z)))
        z = z_next
        if np.linalg.norm(z) > radius:
            termination = Termination.DIVERGED
            break
        try:
            if lyap is not None:
                lyap.append(lyapunov_at(z))
            if env is not None:
                env.append(envelope_norm_at(z))
        except SaddleError as e:
            # keep the diagnostics aligned with the iterates
            iterates.pop()
            grads.pop()
            steps.pop()
            termination, message = Termination.FAILED, e.detail
            break
    else:
        if grads[-1] <= grad_tol:
            termination = Termination.CONVERGED

    if termination == Termination.FAILED:
        LOG.error(f"{config.scheme.value} run failed after {len(iterates) - 1} steps: {message}")

    n = len(iterates)
    return Trajectory(
        n=problem.n,
        iterates=np.vstack(iterates),
        grad_norm=np.asarray(grads),
        step_norm=np.asarray(steps),
        lyapunov=None if lyap is None else np.asarray(lyap[:n]),
        envelope_grad_norm=None if env is None else np.asarray(env[:n]),
        config=config,
        termination=termination,
        message=message,
        grad_tol=grad_tol,
        diverge_radius=radius,
        clamped_steps=clamped,
    )
