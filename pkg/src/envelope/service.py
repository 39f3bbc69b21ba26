from typing import Optional

import numpy as np

from src.config import LOG
from src.envelope.schemas import (
    BoxDominance,
    CurvatureBounds,
    DominanceReport,
    EnvelopeEvaluation,
    EnvelopeGradient,
    EnvelopeHessian,
)
from src.exceptions import ConsistencyError, NumericalSingularityError, ParameterError
from src.numerics.service import solve_linear, sym_eig_min
from src.problems.models import MinimaxProblem
from src.problems.schemas import Box, SplitPoint, as_vector
from src.prox.schemas import ProxResult
from src.prox.service import check_eta, prox

GRADIENT_SLACK = 10.0
SCHUR_TOL = 1e-8


def _prox_for(problem, z, eta, tol, prox_result: Optional[ProxResult]) -> ProxResult:
    if prox_result is not None:
        return prox_result
    return prox(problem, z, eta, tol)


def envelope_value(
    problem: MinimaxProblem, z, eta: float, tol: Optional[float] = None, prox_result=None
) -> float:
    """L(z₊) + (η/2)‖x₊ − x‖² − (η/2)‖y₊ − y‖²."""
    p = _prox_for(problem, z, eta, tol, prox_result)
    x, y = problem.split(z)
    xp, yp = p.z_plus.x, p.z_plus.y
    return float(
        problem.value(p.vector) + 0.5 * eta * (xp - x) @ (xp - x) - 0.5 * eta * (yp - y) @ (yp - y)
    )


def envelope_grad(
    problem: MinimaxProblem, z, eta: float, tol: Optional[float] = None, prox_result=None
) -> EnvelopeGradient:
    p = _prox_for(problem, z, eta, tol, prox_result)
    x, y = problem.split(z)
    gx = eta * (x - p.z_plus.x)
    gy = eta * (p.z_plus.y - y)
    cross = problem.grad(p.vector)
    gap = float(np.linalg.norm(np.concatenate([gx, gy]) - cross))
    if gap > GRADIENT_SLACK * p.tol:
        raise ConsistencyError(
            f"envelope gradient differs from ∇L(z₊) by {gap:.3e} > {GRADIENT_SLACK * p.tol:.3e}"
        )
    return EnvelopeGradient(grad_x=gx, grad_y=gy, cross_check=cross, discrepancy=gap)


def _inverse(M: np.ndarray) -> np.ndarray:
    return solve_linear(M, np.eye(M.shape[0]))


def envelope_hessian(
    problem: MinimaxProblem, z, eta: float, tol: Optional[float] = None, prox_result=None
) -> EnvelopeHessian:
    """Hessian blocks of the saddle envelope from the Hessian of L at z₊.

    With K = ηI + [∇²xx, ∇²xy; −∇²yx, −∇²yy] the sign-flipped gradient of the
    envelope has Jacobian S = ηI − η²K⁻¹. The x rows of S are the envelope's
    x rows; the y rows flip sign. The xx and yy blocks are recomputed from
    their Schur-complement forms and must agree.
    """
    p = _prox_for(problem, z, eta, tol, prox_result)
    w = p.vector
    n, m = problem.n, problem.m
    Hxx, Hyy, Hxy = problem.hess_xx(w), problem.hess_yy(w), problem.hess_xy(w)
    Hyx = Hxy.T
    In, Im = np.eye(n), np.eye(m)

    K = eta * np.eye(n + m) + np.block([[Hxx, Hxy], [-Hyx, -Hyy]])
    S = eta * np.eye(n + m) - eta**2 * _inverse(K)
    xx, xy = S[:n, :n], S[:n, n:]
    yx, yy = -S[n:, :n], -S[n:, n:]

    schur_xx = eta * In - eta**2 * _inverse(eta * In + Hxx + Hxy @ solve_linear(eta * Im - Hyy, Hyx))
    schur_yy = -eta * Im + eta**2 * _inverse(eta * Im - Hyy + Hyx @ solve_linear(eta * In + Hxx, Hxy))
    gap = max(float(np.max(np.abs(schur_xx - xx))), float(np.max(np.abs(schur_yy - yy))))
    if gap > SCHUR_TOL * max(1.0, float(np.max(np.abs(S)))):
        raise ConsistencyError(f"Schur-complement blocks disagree with the full inverse by {gap:.3e}")

    return EnvelopeHessian(
        xx=0.5 * (xx + xx.T),
        xy=xy,
        yx=yx,
        yy=0.5 * (yy + yy.T),
        schur_xx=schur_xx,
        schur_yy=schur_yy,
        schur_gap=gap,
    )


def envelope_evaluate(
    problem: MinimaxProblem, z, eta: float, tol: Optional[float] = None
) -> EnvelopeEvaluation:
    """Value and gradient of the envelope from a single prox solve."""
    p = prox(problem, z, eta, tol)
    return EnvelopeEvaluation(
        value=envelope_value(problem, z, eta, prox_result=p),
        gradient=envelope_grad(problem, z, eta, prox_result=p),
        prox=p,
    )


def _dominance_matrices(problem: MinimaxProblem, w: np.ndarray, eta: float):
    Hxx, Hyy, Hxy = problem.hess_xx(w), problem.hess_yy(w), problem.hess_xy(w)
    Hyx = Hxy.T
    try:
        Dx = Hxx + Hxy @ solve_linear(eta * np.eye(problem.m) - Hyy, Hyx)
        Dy = -Hyy + Hyx @ solve_linear(eta * np.eye(problem.n) + Hxx, Hxy)
    except NumericalSingularityError as e:
        raise ParameterError(f"dominance matrices undefined at eta={eta}: {e.detail}") from e
    return 0.5 * (Dx + Dx.T), 0.5 * (Dy + Dy.T)


def dominance(problem: MinimaxProblem, z, eta: float) -> DominanceReport:
    """Smallest eigenvalues of ∇²xx L + ∇²xy L(ηI − ∇²yy L)⁻¹∇²yx L and of
    −∇²yy L + ∇²yx L(ηI + ∇²xx L)⁻¹∇²xy L at z."""
    check_eta(problem, eta)
    w = as_vector(z)
    Dx, Dy = _dominance_matrices(problem, w, eta)
    return DominanceReport(
        alpha_x=sym_eig_min(Dx),
        alpha_y=sym_eig_min(Dy),
        eta=eta,
        z=SplitPoint.from_vector(w, problem.n),
    )


def dominance_over_box(
    problem: MinimaxProblem, box: Box, eta: float, resolution: int = 9
) -> BoxDominance:
    check_eta(problem, eta)
    if resolution < 2:
        raise ParameterError(f"grid resolution must be at least 2 per axis, got {resolution}")
    if box.dim != problem.dim:
        raise ParameterError(f"box has dimension {box.dim}, problem has {problem.dim}")

    if problem.constant_hessian:
        report = dominance(problem, box.grid(1)[0], eta)
        return BoxDominance(
            alpha_x=report.alpha_x,
            alpha_y=report.alpha_y,
            eta=eta,
            samples=1,
            certified=True,
            box=box,
        )

    points = box.grid(resolution)
    alpha_x = alpha_y = np.inf
    for w in points:
        report = dominance(problem, w, eta)
        alpha_x = min(alpha_x, report.alpha_x)
        alpha_y = min(alpha_y, report.alpha_y)
    LOG.debug(f"grid dominance over {len(points)} points: alpha_x={alpha_x:.4g}, alpha_y={alpha_y:.4g}")
    return BoxDominance(
        alpha_x=float(alpha_x),
        alpha_y=float(alpha_y),
        eta=eta,
        samples=len(points),
        certified=False,
        box=box,
    )


def envelope_smoothness(eta: float, rho: float) -> float:
    """max{η, |η⁻¹ − ρ⁻¹|⁻¹}, which is η for convex-concave problems."""
    if rho <= 0:
        return float(eta)
    return float(max(eta, eta * rho / abs(eta - rho)))


def curvature_bounds(eta: float, rho: float, alpha: float) -> CurvatureBounds:
    if not (eta > 0 and eta > rho):
        raise ParameterError(f"eta must be positive and exceed rho={rho}, got {eta}")
    if alpha == -eta:
        raise ParameterError("alpha = -eta is a pole of the envelope curvature")
    if alpha == 0:
        mu_env = 0.0
    elif np.isinf(alpha) and alpha > 0:
        mu_env = float(eta)
    else:
        mu_env = float(eta * alpha / (eta + alpha))
    return CurvatureBounds(
        eta=eta,
        rho=rho,
        alpha=alpha,
        mu_env=mu_env,
        beta_env=envelope_smoothness(eta, rho),
    )
