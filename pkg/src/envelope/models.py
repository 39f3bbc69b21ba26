from functools import lru_cache
from typing import Optional

import numpy as np

from src.envelope.schemas import EnvelopeHessian
from src.envelope.service import envelope_grad, envelope_hessian, envelope_smoothness, envelope_value
from src.problems.models import MinimaxProblem
from src.problems.schemas import as_vector
from src.prox.schemas import ProxResult
from src.prox.service import check_eta, prox


class SaddleEnvelopeProblem(MinimaxProblem):
    """The saddle envelope L_η of a problem, usable wherever a MinimaxProblem is.

    The envelope is weakly convex-concave with constant ηρ/(η − ρ) and has a
    gradient Lipschitz constant of max{η, |η⁻¹ − ρ⁻¹|⁻¹}. All derivatives at
    a point share one prox solve.
    """

    def __init__(self, problem: MinimaxProblem, eta: float, tol: Optional[float] = None):
        check_eta(problem, eta)
        self.base = problem
        self.eta = float(eta)
        self.tol = tol
        self.n, self.m = problem.n, problem.m
        self.box = problem.box
        self.constant_hessian = problem.constant_hessian
        rho = problem.rho
        self.rho = eta * rho / (eta - rho)
        self.beta = envelope_smoothness(eta, rho)
        self._cached = lru_cache(maxsize=64)(self._solve)

    def _solve(self, key: bytes) -> ProxResult:
        z = np.frombuffer(key, dtype=float)
        return prox(self.base, z, self.eta, self.tol)

    def prox_at(self, z) -> ProxResult:
        return self._cached(np.ascontiguousarray(as_vector(z), dtype=float).tobytes())

    def value(self, z) -> float:
        return envelope_value(self.base, as_vector(z), self.eta, prox_result=self.prox_at(z))

    def grad(self, z) -> np.ndarray:
        return envelope_grad(self.base, as_vector(z), self.eta, prox_result=self.prox_at(z)).vector

    def grad_x(self, z) -> np.ndarray:
        return self.grad(z)[: self.n]

    def grad_y(self, z) -> np.ndarray:
        return self.grad(z)[self.n :]

    def blocks(self, z) -> EnvelopeHessian:
        return envelope_hessian(self.base, as_vector(z), self.eta, prox_result=self.prox_at(z))

    def hessian(self, z) -> np.ndarray:
        return self.blocks(z).full

    def hess_xx(self, z) -> np.ndarray:
        return self.blocks(z).xx

    def hess_yy(self, z) -> np.ndarray:
        return self.blocks(z).yy

    def hess_xy(self, z) -> np.ndarray:
        return self.blocks(z).xy
