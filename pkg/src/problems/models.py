from abc import ABC, abstractmethod
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial

from src.exceptions import ParameterError
from src.numerics.service import (
    GRAD_STEP_EXPONENT,
    HESS_STEP_EXPONENT,
    central_gradient,
    central_hessian,
    spectral_norm,
)
from src.problems.schemas import Box, ProblemConstants, as_vector


class MinimaxProblem(ABC):
    """Smooth objective L(x, y), minimized over x and maximized over y.

    Every method takes the stacked vector z = (x, y) of length n + m. The
    certified constants are

        rho    weak convexity-concavity: ∇²xx L ⪰ −rho·I and −∇²yy L ⪰ −rho·I
        beta   bound on ‖∇²L‖
        H      Lipschitz constant of ∇²L
        delta  bound on ‖∇²xy L‖
        xi     Lipschitz constant of ∇²xx L in y and of ∇²yy L in x

    and hold on `box` when one is declared, globally otherwise. A constant
    left as None is uncertified.
    """

    n: int
    m: int
    rho: Optional[float] = None
    beta: Optional[float] = None
    H: Optional[float] = None
    delta: Optional[float] = None
    xi: Optional[float] = None
    box: Optional[Box] = None
    constant_hessian: bool = False

    @abstractmethod
    def value(self, z) -> float: ...

    @abstractmethod
    def grad_x(self, z) -> np.ndarray: ...

    @abstractmethod
    def grad_y(self, z) -> np.ndarray: ...

    @abstractmethod
    def hess_xx(self, z) -> np.ndarray: ...

    @abstractmethod
    def hess_yy(self, z) -> np.ndarray: ...

    @abstractmethod
    def hess_xy(self, z) -> np.ndarray: ...

    @property
    def dim(self) -> int:
        return self.n + self.m

    def split(self, z) -> tuple[np.ndarray, np.ndarray]:
        v = as_vector(z)
        return v[: self.n], v[self.n :]

    def hess_yx(self, z) -> np.ndarray:
        return self.hess_xy(z).T

    def grad(self, z) -> np.ndarray:
        return np.concatenate([self.grad_x(z), self.grad_y(z)])

    def grad_norm(self, z) -> float:
        return float(np.linalg.norm(self.grad(z)))

    def hessian(self, z) -> np.ndarray:
        Hxy = self.hess_xy(z)
        return np.block([[self.hess_xx(z), Hxy], [Hxy.T, self.hess_yy(z)]])

    def constants(self) -> ProblemConstants:
        return ProblemConstants(
            rho=self.rho,
            beta=self.beta,
            H=self.H,
            delta=self.delta,
            xi=self.xi,
            box=self.box,
            constant_hessian=self.constant_hessian,
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, m={self.m}, rho={self.rho}, beta={self.beta})"


class RotationalQuadratic(MinimaxProblem):
    """L = −(ρ/2)‖x‖² + a·xᵀy + (ρ/2)‖y‖² with x, y both n-dimensional.

    A negative ρ gives a strongly convex-strongly concave instance.
    """

    constant_hessian = True

    def __init__(self, rho: float, a: float, n: int = 1):
        if not (np.isfinite(rho) and np.isfinite(a)):
            raise ParameterError("rho and a must be finite")
        if n < 1:
            raise ParameterError("dimension n must be at least 1")
        self.rho = float(rho)
        self.a = float(a)
        self.n = self.m = int(n)
        self.beta = float(np.hypot(self.rho, self.a))
        self.H = 0.0
        self.delta = abs(self.a)
        self.xi = 0.0

    def value(self, z) -> float:
        x, y = self.split(z)
        r = self.rho
        return float(-0.5 * r * x @ x + self.a * x @ y + 0.5 * r * y @ y)

    def grad_x(self, z) -> np.ndarray:
        x, y = self.split(z)
        return -self.rho * x + self.a * y

    def grad_y(self, z) -> np.ndarray:
        x, y = self.split(z)
        return self.a * x + self.rho * y

    def hess_xx(self, z) -> np.ndarray:
        return -self.rho * np.eye(self.n)

    def hess_yy(self, z) -> np.ndarray:
        return self.rho * np.eye(self.m)

    def hess_xy(self, z) -> np.ndarray:
        return self.a * np.eye(self.n)


def _poly_range(p: Polynomial, low: float, high: float) -> tuple[float, float]:
    """Exact min and max of a real polynomial on [low, high]."""
    candidates = [low, high]
    roots = p.deriv().roots() if p.degree() > 1 else []
    for root in roots:
        if abs(root.imag) < 1e-12 and low <= root.real <= high:
            candidates.append(root.real)
    values = p(np.asarray(candidates))
    return float(np.min(values)), float(np.max(values))


class CoupledSeparable(MinimaxProblem):
    """L = Σ f(xᵢ) + xᵀAy − Σ g(yⱼ) with univariate polynomials f and g.

    Coefficients are stored in ascending-degree order. The certified constants
    are derived from the polynomials on `box`, whose first n coordinates
    bound x and last m bound y.
    """

    def __init__(self, f_coeffs, g_coeffs, A, box: Box):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if not np.all(np.isfinite(A)):
            raise ParameterError("coupling matrix has non-finite entries")
        self.n, self.m = A.shape
        if box.dim != self.n + self.m:
            raise ParameterError(
                f"box has dimension {box.dim}, problem has {self.n + self.m}"
            )
        self.f = Polynomial(np.asarray(f_coeffs, dtype=float))
        self.g = Polynomial(np.asarray(g_coeffs, dtype=float))
        self.f1, self.f2 = self.f.deriv(1), self.f.deriv(2)
        self.g1, self.g2 = self.g.deriv(1), self.g.deriv(2)
        self.A = A
        self.box = box
        self._certify()

    @property
    def f_coeffs(self) -> list[float]:
        return self.f.coef.tolist()

    @property
    def g_coeffs(self) -> list[float]:
        return self.g.coef.tolist()

    def _certify(self) -> None:
        lo, hi = self.box.bounds()
        f2 = [_poly_range(self.f2, a, b) for a, b in zip(lo[: self.n], hi[: self.n])]
        g2 = [_poly_range(self.g2, a, b) for a, b in zip(lo[self.n :], hi[self.n :])]
        f3 = [_poly_range(self.f.deriv(3), a, b) for a, b in zip(lo[: self.n], hi[: self.n])]
        g3 = [_poly_range(self.g.deriv(3), a, b) for a, b in zip(lo[self.n :], hi[self.n :])]

        min_curv = min(min(r[0] for r in f2), min(r[0] for r in g2))
        max_abs = max(max(abs(v) for r in f2 + g2 for v in r), 0.0)
        self.delta = spectral_norm(self.A)
        self.rho = -min_curv
        self.beta = max_abs + self.delta
        self.H = max(max(abs(v) for r in f3 + g3 for v in r), 0.0)
        self.xi = 0.0

    def value(self, z) -> float:
        x, y = self.split(z)
        return float(np.sum(self.f(x)) + x @ self.A @ y - np.sum(self.g(y)))

    def grad_x(self, z) -> np.ndarray:
        x, y = self.split(z)
        return self.f1(x) + self.A @ y

    def grad_y(self, z) -> np.ndarray:
        x, y = self.split(z)
        return self.A.T @ x - self.g1(y)

    def hess_xx(self, z) -> np.ndarray:
        x, _ = self.split(z)
        return np.diag(self.f2(x))

    def hess_yy(self, z) -> np.ndarray:
        _, y = self.split(z)
        return -np.diag(self.g2(y))

    def hess_xy(self, z) -> np.ndarray:
        return self.A.copy()


class FiniteDifferenceProblem(MinimaxProblem):
    """Wraps a bare value function value_fn(x, y); derivatives come from
    central differences with steps h = max(1, |zᵢ|)·eps^k."""

    def __init__(
        self,
        value_fn: Callable[[np.ndarray, np.ndarray], float],
        n: int,
        m: int,
        grad_exponent: float = GRAD_STEP_EXPONENT,
        hess_exponent: float = HESS_STEP_EXPONENT,
        rho: Optional[float] = None,
        beta: Optional[float] = None,
        box: Optional[Box] = None,
    ):
        self.value_fn = value_fn
        self.n, self.m = int(n), int(m)
        self.grad_exponent = grad_exponent
        self.hess_exponent = hess_exponent
        self.rho = rho
        self.beta = beta
        self.box = box

    def _stacked_value(self, v: np.ndarray) -> float:
        return float(self.value_fn(v[: self.n], v[self.n :]))

    def value(self, z) -> float:
        return self._stacked_value(as_vector(z))

    def grad(self, z) -> np.ndarray:
        return central_gradient(self._stacked_value, as_vector(z), self.grad_exponent)

    def grad_x(self, z) -> np.ndarray:
        return self.grad(z)[: self.n]

    def grad_y(self, z) -> np.ndarray:
        return self.grad(z)[self.n :]

    def hessian(self, z) -> np.ndarray:
        return central_hessian(self._stacked_value, as_vector(z), self.hess_exponent)

    def hess_xx(self, z) -> np.ndarray:
        return self.hessian(z)[: self.n, : self.n]

    def hess_yy(self, z) -> np.ndarray:
        return self.hessian(z)[self.n :, self.n :]

    def hess_xy(self, z) -> np.ndarray:
        return self.hessian(z)[: self.n, self.n :]
