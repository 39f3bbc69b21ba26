from typing import Callable

import numpy as np
import scipy.linalg

from src.exceptions import EvaluationError, NumericalSingularityError
from src.numerics.schemas import SymMatrix

EPS = float(np.finfo(float).eps)
GRAD_STEP_EXPONENT = 1.0 / 3.0
HESS_STEP_EXPONENT = 1.0 / 4.0
MAX_CONDITION = 1e12


def _as_finite(M, what: str) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(A)):
        raise EvaluationError(f"{what} has non-finite entries")
    return A


def solve_linear(M, b) -> np.ndarray:
    """Solve ``M v = b`` for a small dense nonsingular ``M``.

    Raises NumericalSingularityError when the 2-norm condition number exceeds
    1e12 or the back-substituted residual violates
    ``‖Mv − b‖ ≤ 1e-10·(‖M‖‖v‖ + ‖b‖)``.
    """
    A = _as_finite(M, "matrix")
    rhs = _as_finite(b, "right-hand side")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NumericalSingularityError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] == 0:
        return np.zeros(0)

    with np.errstate(divide="ignore", invalid="ignore"):
        condition = np.linalg.cond(A)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise NumericalSingularityError(
            f"matrix of order {A.shape[0]} is numerically singular (cond={condition:.3e})"
        )

    try:
        v = scipy.linalg.solve(A, rhs, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise NumericalSingularityError(f"dense solve failed with error {e}") from e

    residual = np.linalg.norm(A @ v - rhs)
    bound = 1e-10 * (np.linalg.norm(A, 2) * np.linalg.norm(v) + np.linalg.norm(rhs))
    if residual > bound:
        raise NumericalSingularityError(
            f"solve residual {residual:.3e} exceeds bound {bound:.3e}"
        )
    return v


def sym_eig_min(M) -> float:
    S = SymMatrix.of(M)
    if S.order == 0:
        return float("inf")
    return float(scipy.linalg.eigh(S.entries, eigvals_only=True, check_finite=False)[0])


def sym_eig_max(M) -> float:
    S = SymMatrix.of(M)
    if S.order == 0:
        return float("-inf")
    return float(scipy.linalg.eigh(S.entries, eigvals_only=True, check_finite=False)[-1])


def spectral_norm(M) -> float:
    A = _as_finite(M, "matrix")
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(np.atleast_2d(A), 2))


def fd_steps(z: np.ndarray, exponent: float) -> np.ndarray:
    # h = max(1, |z_i|)·eps^exponent, coordinatewise
    return np.maximum(1.0, np.abs(z)) * EPS**exponent


def _checked(fn: Callable, point: np.ndarray):
    value = fn(point)
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"non-finite value at stencil point {point.tolist()}")
    return value


def central_gradient(
    fn: Callable[[np.ndarray], float], z, exponent: float = GRAD_STEP_EXPONENT
) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    h = fd_steps(z, exponent)
    grad = np.zeros(z.size)
    e = np.zeros(z.size)
    for i in range(z.size):
        e[i] = h[i]
        grad[i] = (_checked(fn, z + e) - _checked(fn, z - e)) / (2.0 * h[i])
        e[i] = 0.0
    return grad


def central_hessian(
    fn: Callable[[np.ndarray], float], z, exponent: float = HESS_STEP_EXPONENT
) -> np.ndarray:
    """Second differences of a scalar function from the four-point stencil."""
    z = np.asarray(z, dtype=float)
    h = fd_steps(z, exponent)
    d = z.size
    hess = np.zeros((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        for j in range(i, d):
            ej = np.zeros(d)
            ej[j] = h[j]
            value = (
                _checked(fn, z + ei + ej)
                - _checked(fn, z + ei - ej)
                - _checked(fn, z - ei + ej)
                + _checked(fn, z - ei - ej)
            ) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = value
    return hess


def central_jacobian(
    fn: Callable[[np.ndarray], np.ndarray], z, exponent: float = GRAD_STEP_EXPONENT
) -> np.ndarray:
    """Columns are central differences of a vector-valued function."""
    z = np.asarray(z, dtype=float)
    h = fd_steps(z, exponent)
    columns = []
    e = np.zeros(z.size)
    for j in range(z.size):
        e[j] = h[j]
        plus = np.atleast_1d(_checked(fn, z + e))
        minus = np.atleast_1d(_checked(fn, z - e))
        columns.append((plus - minus) / (2.0 * h[j]))
        e[j] = 0.0
    return np.column_stack(columns)
