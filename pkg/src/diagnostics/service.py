from typing import Optional

import numpy as np

from src.algorithms.enums import Termination
from src.algorithms.schemas import Trajectory
from src.config import get_settings
from src.diagnostics.enums import RegimeTag
from src.diagnostics.schemas import QuadraticOracle, RegimeLabel
from src.exceptions import ParameterError
from src.numerics.service import solve_linear, sym_eig_min
from src.problems.models import MinimaxProblem
from src.problems.schemas import Box, as_vector
from src.prox.service import check_eta, partial_moreau_x, partial_moreau_y, prox

# mean recurrence distance at the best lag, relative to the orbit radius
CYCLE_TOL_FRACTION = 0.1
# largest per-step log drift of the period-averaged gradient norm; slow spirals exceed it
CYCLE_TREND = 1e-5
MIN_LAG = 2


def _check_eta_rho(eta: float, rho: float) -> None:
    if not (eta > 0 and eta > rho):
        raise ParameterError(f"eta must be positive and exceed rho={rho}, got {eta}")


def damping_cap(eta: float, rho: float) -> float:
    """min{1, (η/ρ − 1)²}, saturating at 1 for convex-concave problems."""
    if rho <= 0:
        return 1.0
    return min(1.0, (eta / rho - 1.0) ** 2)


def moreau_lower_curvature(eta: float, rho: float) -> float:
    """(η⁻¹ − ρ⁻¹)⁻¹, the curvature floor of a Moreau envelope of a ρ-weakly convex function."""
    _check_eta_rho(eta, rho)
    if rho == 0:
        return 0.0
    return -eta * rho / (eta - rho)


def lyapunov(problem: MinimaxProblem, z, eta: float, tol: Optional[float] = None) -> float:
    """y-smoothed minus x-smoothed partial Moreau envelope; zero exactly at
    stationary points and nonnegative elsewhere."""
    upper = partial_moreau_y(problem, z, eta, tol)
    lower = partial_moreau_x(problem, z, eta, tol)
    return upper.value - lower.value


def lyapunov_recurrence_slack(
    problem: MinimaxProblem, z, eta: float, alpha: float, tol: Optional[float] = None
) -> float:
    """𝓛(z) − 𝓛(z₊) − ½(α + (η⁻¹ − ρ⁻¹)⁻¹)‖z₊ − z‖², nonnegative whenever α is
    a dominance bound valid along the step."""
    z = as_vector(z)
    z_plus = prox(problem, z, eta, tol).vector
    coeff = 0.5 * (alpha + moreau_lower_curvature(eta, problem.rho))
    d = z_plus - z
    return lyapunov(problem, z, eta, tol) - lyapunov(problem, z_plus, eta, tol) - coeff * float(d @ d)


def _best_recurrence(window: np.ndarray) -> tuple[int, float]:
    k = len(window)
    best_lag, best = MIN_LAG, np.inf
    for lag in range(MIN_LAG, max(MIN_LAG, 3 * k // 4) + 1):
        if lag >= k:
            break
        distance = float(np.mean(np.linalg.norm(window[lag:] - window[:-lag], axis=1)))
        if distance < best:
            best_lag, best = lag, distance
    return best_lag, best


def classify(
    trajectory: Trajectory,
    grad_tol: Optional[float] = None,
    cycle_tol: Optional[float] = None,
    burn_in: Optional[int] = None,
    window: Optional[int] = None,
) -> RegimeLabel:
    """Label a trajectory Diverged, Converged, Cycle or Undetermined, in that
    order of precedence.

    Cycle needs `burn_in + window` iterates. On the last `window` of them the
    gradient norm must stay above grad_tol, the best lag p in [2, 3·window/4]
    must bring the orbit back within cycle_tol on average, and the log of the
    mean gradient norm over the last p iterates may differ from that over the
    first p by at most CYCLE_TREND per step in between.
    cycle_tol defaults to a tenth of the mean distance to the window centroid.
    """
    settings = get_settings()
    grad_tol = trajectory.grad_tol if grad_tol is None else grad_tol
    burn_in = settings.BURN_IN if burn_in is None else burn_in
    window = settings.WINDOW if window is None else window

    if trajectory.termination == Termination.DIVERGED:
        return RegimeLabel(tag=RegimeTag.DIVERGED)

    final_grad = float(trajectory.grad_norm[-1])
    if final_grad <= grad_tol:
        return RegimeLabel(
            tag=RegimeTag.CONVERGED,
            point=trajectory.final.tolist(),
            grad_norm=final_grad,
        )

    if window > MIN_LAG and len(trajectory.iterates) >= burn_in + window:
        tail = trajectory.iterates[-window:]
        grads = trajectory.grad_norm[-window:]
        if np.all(grads > grad_tol):
            centroid = tail.mean(axis=0)
            radius = float(np.mean(np.linalg.norm(tail - centroid, axis=1)))
            tol = CYCLE_TOL_FRACTION * radius if cycle_tol is None else cycle_tol
            lag, recurrence = _best_recurrence(tail)
            first, last = float(np.mean(grads[:lag])), float(np.mean(grads[-lag:]))
            trend = abs(np.log(last / first)) / (window - lag)
            if radius > 0 and recurrence <= tol and trend <= CYCLE_TREND:
                return RegimeLabel(
                    tag=RegimeTag.CYCLE,
                    period=lag,
                    radius=radius,
                    recurrence=recurrence,
                    cycle_tol=tol,
                    grad_norm=final_grad,
                )

    return RegimeLabel(tag=RegimeTag.UNDETERMINED, grad_norm=final_grad)


def quadratic_oracle(rho: float, a: float, eta: float, lam: float) -> QuadraticOracle:
    _check_eta_rho(eta, rho)
    alpha = -rho + a**2 / (eta - rho)
    if eta + alpha == 0:
        raise ParameterError("eta + alpha vanishes, the prox map is undefined")
    C = 1.0 - lam * alpha / (eta + alpha)
    D = lam * eta * a / ((eta + alpha) * (eta - rho))
    factor = C**2 + D**2
    cycles = abs(factor - 1.0) <= 1e-12
    return QuadraticOracle(
        rho=rho,
        a=a,
        eta=eta,
        lambda_=lam,
        alpha=alpha,
        C=C,
        D=D,
        factor=factor,
        converges=bool(factor < 1.0 and not cycles),
        cycles=bool(cycles),
    )


def lambda_bound_two_sided(eta: float, rho: float, alpha: float) -> float:
    _check_eta_rho(eta, rho)
    if not alpha > 0:
        raise ParameterError(f"two-sided dominance needs alpha > 0, got {alpha}")
    return 2.0 * damping_cap(eta, rho) / (eta / alpha + 1.0)


def rate_two_sided(eta: float, lam: float, rho: float, alpha: float) -> float:
    """Squared-distance contraction factor per damped PPM step under two-sided dominance."""
    bound = lambda_bound_two_sided(eta, rho, alpha)
    if lam < 0 or lam > bound * (1.0 + 1e-12):
        raise ParameterError(f"lambda={lam} lies outside [0, {bound:.6g}]")
    return 1.0 - 2.0 * lam / (eta / alpha + 1.0) + lam**2 / damping_cap(eta, rho)


def suggest_one_sided_params(
    eta: float, rho: float, alpha: float, c_multiplier: float = 1.0
) -> tuple[float, float]:
    """Damping pair (λ, γ) for one-sided dominance; the hidden constants are
    replaced by `c_multiplier`."""
    _check_eta_rho(eta, rho)
    if not alpha > 0:
        raise ParameterError(f"one-sided dominance needs alpha > 0, got {alpha}")
    if not c_multiplier > 0:
        raise ParameterError(f"multiplier must be positive, got {c_multiplier}")
    gap = abs(eta / rho - 1.0) if rho > 0 else np.inf
    lam = c_multiplier * min(1.0, gap**3) / (1.0 + eta / alpha) ** 2
    gamma = c_multiplier * min(1.0, gap)
    return float(min(1.0, lam)), float(min(1.0, gamma))


def weak_regime_contraction(lam: float, eta: float, rho: float, alpha0: float) -> float:
    """Local squared-distance factor after initialization, with α₀/2 in
    place of the dominance constant."""
    _check_eta_rho(eta, rho)
    if not alpha0 > 0:
        raise ParameterError(f"alpha0 must be positive, got {alpha0}")
    return 1.0 - 2.0 * lam / (2.0 * eta / alpha0 + 1.0) + lam**2 / damping_cap(eta, rho)


def measured_contraction(trajectory: Trajectory, tail: Optional[int] = None) -> Optional[float]:
    """Geometric-mean per-step ratio of the gradient norm over the last
    `tail` steps, half the run by default."""
    g = trajectory.grad_norm
    steps = len(g) - 1
    if steps < 1:
        return None
    tail = max(1, min(steps, tail or steps // 2 or 1))
    start, end = float(g[-tail - 1]), float(g[-1])
    if start <= 0 or end <= 0:
        return None
    return float((end / start) ** (1.0 / tail))


def squared_distance_ratios(trajectory: Trajectory, target) -> np.ndarray:
    """‖z_{k+1} − z*‖² / ‖z_k − z*‖² for every step."""
    d = np.sum((trajectory.iterates - as_vector(target)) ** 2, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return d[1:] / d[:-1]


def divergence_cap(eta: float, rho: float, lipschitz: float) -> float:
    """Largest Lyapunov increase per PPM step for a rho-weakly convex-concave
    problem whose gradient is bounded by `lipschitz` on the region."""
    _check_eta_rho(eta, rho)
    return rho * lipschitz**2 / (2.0 * eta**2) * (1.0 + eta / (eta - rho))


def visited_box(trajectory: Trajectory) -> Box:
    return Box(
        lower=trajectory.iterates.min(axis=0).tolist(),
        upper=trajectory.iterates.max(axis=0).tolist(),
    )


def primal_dual_gap(problem: MinimaxProblem, z) -> float:
    """max_v L(x, v) − min_u L(u, y) for a strongly convex-strongly concave
    quadratic, the η → 0 limit of the Lyapunov function."""
    if not problem.constant_hessian:
        raise ParameterError("the closed-form gap needs a quadratic problem")
    w = as_vector(z)
    Hxx, Hyy = problem.hess_xx(w), problem.hess_yy(w)
    if not (sym_eig_min(Hxx) > 0 and sym_eig_min(-Hyy) > 0):
        raise ParameterError("the gap is finite only for strongly convex-strongly concave problems")
    gx, gy = problem.grad_x(w), problem.grad_y(w)
    return float(0.5 * gx @ solve_linear(Hxx, gx) - 0.5 * gy @ solve_linear(Hyy, gy))


def stationarity_bounds(problem: MinimaxProblem, eta: float) -> tuple[float, float]:
    """Factors (c₁, c₂) with ‖∇L‖ ≤ c₁‖∇L_η‖ and ‖∇L_η‖ ≤ c₂‖∇L‖."""
    check_eta(problem, eta)
    return 1.0 + problem.beta / eta, eta / (eta - problem.rho)
