"""Invariant suites behind `saddle check`.

Every check reports `slack = bound - measured`; a check passes when the
slack is nonnegative. Random samples come from one seeded generator per
suite so reports are reproducible.
"""
import os
from typing import Callable, Optional

import numpy as np

from src.algorithms.service import ppm_step
from src.config import LOG, get_settings
from src.diagnostics.service import (
    divergence_cap,
    lambda_bound_two_sided,
    lyapunov,
    lyapunov_recurrence_slack,
    quadratic_oracle,
    rate_two_sided,
    stationarity_bounds,
)
from src.envelope.models import SaddleEnvelopeProblem
from src.envelope.service import (
    curvature_bounds,
    dominance,
    dominance_over_box,
    envelope_grad,
    envelope_hessian,
    envelope_smoothness,
)
from src.exceptions import ConfigError, SaddleError
from src.experiments.enums import Suite
from src.experiments.schemas import CheckResult, SuiteReport
from src.numerics.service import central_gradient, solve_linear, sym_eig_max, sym_eig_min
from src.problems.models import MinimaxProblem, RotationalQuadratic
from src.problems.schemas import Box
from src.problems.service import (
    FIGURE1_BOX,
    check_certified_constants,
    gradient_fd_error,
    hessian_fd_error,
    make_figure1_problem,
)
from src.prox.enums import InnerMethod
from src.prox.service import inner_solve, partial_moreau_x, partial_moreau_y, prox
from src.utils import dump_json

# samples are drawn away from the edge of the figure1 box so prox points stay inside it
SAMPLE_BOX = Box.cube(-3.0, 3.0, 2)
FD_TOL = 1e-11
QUADRATIC = dict(rho=1.0, a=2.0, eta=3.0)
FIGURE1_ETA = 40.0


def _result(name: str, bound: float, measured: float, detail: str = "") -> CheckResult:
    slack = float(bound - measured)
    return CheckResult(name=name, passed=bool(np.isfinite(slack) and slack >= 0), slack=slack, detail=detail)


def _guarded(name: str, check: Callable[[], CheckResult]) -> CheckResult:
    try:
        return check()
    except SaddleError as e:
        LOG.error(f"check '{name}' raised: {e.detail}")
        return CheckResult(name=name, passed=False, slack=float("-inf"), detail=e.detail)


def _quadratic() -> RotationalQuadratic:
    return RotationalQuadratic(QUADRATIC["rho"], QUADRATIC["a"])


def _families() -> list[tuple[str, MinimaxProblem, float]]:
    return [
        ("rotational_quadratic", _quadratic(), QUADRATIC["eta"]),
        *[(f"figure1(a={a:g})", make_figure1_problem(a), FIGURE1_ETA) for a in (1.0, 10.0, 100.0)],
    ]


def problems_suite(rng: np.random.Generator, samples: int = 50) -> list[CheckResult]:
    checks = []
    for label, problem, _ in _families():
        points = SAMPLE_BOX.sample(rng, samples)

        def grad_check(problem=problem, points=points):
            worst = max(gradient_fd_error(problem, z) for z in points)
            return _result(f"{label}: gradient vs finite differences", 1e-6, worst)

        def hess_check(problem=problem, points=points):
            worst = max(hessian_fd_error(problem, z) for z in points)
            return _result(f"{label}: Hessian vs finite differences", 1e-4, worst)

        def constants_check(problem=problem):
            report = check_certified_constants(problem, rng, samples)
            slack = min(report.curvature_slack, report.smoothness_slack)
            bound = 1e-9 * max(1.0, abs(problem.beta))
            return _result(f"{label}: certified rho and beta", bound, -slack, f"{report.samples} samples")

        checks += [_guarded(c.__name__, c) for c in (grad_check, hess_check, constants_check)]
    return checks


def numerics_suite(rng: np.random.Generator, max_order: int = 32) -> list[CheckResult]:
    def residuals():
        worst = 0.0
        for order in range(1, max_order + 1):
            M = rng.standard_normal((order, order)) + order * np.eye(order)
            b = rng.standard_normal(order)
            v = solve_linear(M, b)
            scale = np.linalg.norm(M, 2) * np.linalg.norm(v) + np.linalg.norm(b)
            worst = max(worst, float(np.linalg.norm(M @ v - b) / scale))
        return _result(f"solve residual, orders 1..{max_order}", 1e-10, worst)

    def eig_shift():
        worst = 0.0
        for order in range(1, 11):
            A = rng.standard_normal((order, order))
            M = 0.5 * (A + A.T)
            c = float(rng.uniform(-10.0, 10.0))
            gap = abs(sym_eig_min(M + c * np.eye(order)) - sym_eig_min(M) - c)
            worst = max(worst, gap / max(1.0, np.linalg.norm(M, 2)))
        return _result("smallest eigenvalue under identity shift", 1e-9, worst)

    return [_guarded("residuals", residuals), _guarded("eig_shift", eig_shift)]


def _moreau_gradient_gap(problem: MinimaxProblem, z: np.ndarray, eta: float) -> float:
    """Largest relative gap between η(x − u), η(v − y) and differences of the partial envelopes."""
    x, y = problem.split(z)
    lower = partial_moreau_x(problem, z, eta, FD_TOL)
    upper = partial_moreau_y(problem, z, eta, FD_TOL)
    dx = central_gradient(lambda u: partial_moreau_x(problem, np.concatenate([u, y]), eta, FD_TOL).value, x)
    dy = central_gradient(lambda v: partial_moreau_y(problem, np.concatenate([x, v]), eta, FD_TOL).value, y)
    gx, gy = eta * (x - lower.arg), eta * (upper.arg - y)
    return max(
        float(np.linalg.norm(dx - gx) / max(1.0, np.linalg.norm(gx))),
        float(np.linalg.norm(dy - gy) / max(1.0, np.linalg.norm(gy))),
    )


def prox_suite(rng: np.random.Generator, samples: int = 20) -> list[CheckResult]:
    checks = []
    for label, problem, eta in _families()[:3]:
        points = SAMPLE_BOX.sample(rng, samples)

        def uniqueness(problem=problem, eta=eta, points=points):
            worst = 0.0
            for z in points[:5]:
                newton = prox(problem, z, eta, 1e-10).vector
                gda = prox(problem, z, eta, 1e-10, method=InnerMethod.GDA).vector
                worst = max(worst, float(np.linalg.norm(newton - gda)) / max(1.0, float(np.linalg.norm(newton))))
            return _result(f"{label}: Newton and GDA reach the same prox point", 1e-8, worst)

        def contraction(problem=problem, eta=eta, points=points):
            worst = 0.0
            for z in points[:5]:
                result = prox(problem, z, eta, 1e-10, method=InnerMethod.GDA)
                if result.step_ratios:
                    worst = max(worst, max(result.step_ratios) - result.contraction_bound)
            return _result(f"{label}: GDA step ratios below the certificate", 1e-9, worst)

        def fixed_point(problem=problem, eta=eta):
            origin = np.zeros(problem.dim)
            moved = float(np.linalg.norm(prox(problem, origin, eta).vector - origin))
            return _result(f"{label}: stationary point is a prox fixed point", 1e-10, moved)

        def displacement(problem=problem, eta=eta, points=points):
            # ‖z − z₊‖ ≤ ‖∇L(z)‖/(η − ρ), plus the inner tolerance mapped the same way
            mu = eta - problem.rho
            worst = 0.0
            for z in points:
                moved = float(np.linalg.norm(prox(problem, z, eta, 1e-10).vector - z))
                worst = max(worst, moved - (problem.grad_norm(z) + 1e-10) / mu)
            return _result(f"{label}: prox displacement below the gradient bound", 1e-12, worst)

        def restarts(problem=problem, eta=eta, points=points):
            tol = 1e-10
            worst = 0.0
            for z in points[:5]:
                center = inner_solve(problem, z, eta, tol).vector
                shifted = inner_solve(problem, z, eta, tol, start=z + 0.5 * rng.normal(size=z.size)).vector
                worst = max(worst, float(np.linalg.norm(center - shifted)))
            bound = 10.0 * tol / (eta - problem.rho)
            return _result(f"{label}: prox point independent of the initial guess", bound, worst)

        def moreau(problem=problem, eta=eta, points=points):
            worst = max(_moreau_gradient_gap(problem, z, eta) for z in points)
            return _result(f"{label}: partial envelope gradients", 1e-5, worst)

        suite = (uniqueness, contraction, fixed_point, displacement, restarts, moreau)
        checks += [_guarded(c.__name__, c) for c in suite]
    return checks


def envelope_suite(rng: np.random.Generator, samples: int = 100) -> list[CheckResult]:
    checks = []
    for label, problem, eta in _families():
        env = SaddleEnvelopeProblem(problem, eta, FD_TOL)
        points = SAMPLE_BOX.sample(rng, samples)

        def grad_fd(env=env, points=points):
            worst = max(gradient_fd_error(env, z) for z in points)
            return _result(f"{label}: envelope gradient vs finite differences", 1e-5, worst)

        def hess_fd(env=env, points=points):
            worst = max(hessian_fd_error(env, z) for z in points)
            return _result(f"{label}: envelope Hessian vs finite differences", 1e-4, worst)

        def stationarity(problem=problem, eta=eta, points=points):
            c1, c2 = stationarity_bounds(problem, eta)
            worst = 0.0
            for z in points:
                g = problem.grad_norm(z)
                g_env = envelope_grad(problem, z, eta).norm()
                worst = max(worst, (g - c1 * g_env) / max(1.0, g), (g_env - c2 * g) / max(1.0, g))
            return _result(f"{label}: stationarity equivalence", 1e-8, worst)

        def eigen_bounds(problem=problem, eta=eta, points=points):
            worst = 0.0
            for z in points[:20]:
                p = prox(problem, z, eta, FD_TOL)
                report = dominance(problem, p.vector, eta)
                H = envelope_hessian(problem, z, eta, prox_result=p)
                for alpha, block in ((report.alpha_x, H.xx), (report.alpha_y, -H.yy)):
                    if alpha <= -eta:
                        continue
                    mu_env = curvature_bounds(eta, problem.rho, alpha).mu_env
                    worst = max(worst, mu_env - sym_eig_min(block), sym_eig_max(block) - eta)
            return _result(f"{label}: envelope Hessian eigenvalue bounds", 1e-6, worst)

        def smoothness(problem=problem, eta=eta, points=points):
            beta_env = envelope_smoothness(eta, problem.rho)
            worst = 0.0
            for z, w in zip(points[::2], points[1::2]):
                change = np.linalg.norm(envelope_grad(problem, z, eta).vector - envelope_grad(problem, w, eta).vector)
                allowed = beta_env * np.linalg.norm(z - w)
                worst = max(worst, (change - allowed) / max(1.0, allowed))
            return _result(f"{label}: envelope gradient Lipschitz bound", 1e-6, worst)

        checks += [_guarded(c.__name__, c) for c in (grad_fd, hess_fd, stationarity, eigen_bounds, smoothness)]
    return checks


def quadratic_suite(rng: np.random.Generator, steps: int = 50) -> list[CheckResult]:
    problem = _quadratic()
    rho, a, eta = QUADRATIC["rho"], QUADRATIC["a"], QUADRATIC["eta"]
    lambdas = (0.25, 0.5, 0.79, 0.8, 1.0)

    def linear_map():
        worst = 0.0
        for lam in lambdas:
            M = quadratic_oracle(rho, a, eta, lam).matrix()
            for z in rng.uniform(-3.0, 3.0, size=(10, 2)):
                gap = np.linalg.norm(ppm_step(problem, z, eta, lam) - M @ z)
                worst = max(worst, float(gap / max(1.0, np.linalg.norm(z))))
        return _result("damped PPM step equals the closed-form map", 1e-10, worst)

    def norm_ratio():
        worst = 0.0
        for lam in lambdas:
            expected = np.sqrt(quadratic_oracle(rho, a, eta, lam).factor)
            z = rng.uniform(-1.0, 1.0, size=2)
            for _ in range(steps):
                z_next = ppm_step(problem, z, eta, lam)
                worst = max(worst, abs(np.linalg.norm(z_next) / np.linalg.norm(z) - expected))
                z = z_next
        return _result("per-step norm ratio equals √(C² + D²)", 1e-8, worst)

    def rate_bound():
        alpha = quadratic_oracle(rho, a, eta, 1.0).alpha
        bound = lambda_bound_two_sided(eta, rho, alpha)
        worst = 0.0
        for lam in np.linspace(0.05, 1.0, 8) * bound:
            factor = rate_two_sided(eta, lam, rho, alpha)
            z = rng.uniform(-1.0, 1.0, size=2)
            for _ in range(steps):
                z_next = ppm_step(problem, z, eta, lam)
                worst = max(worst, float(z_next @ z_next / (z @ z)) - factor)
                z = z_next
        return _result("squared-distance contraction within the rate bound", 1e-9, worst)

    def simplified_rate():
        worst = 0.0
        for r, alpha in ((1.0, 1.0), (2.0, 0.5), (0.5, 3.0)):
            e = 2.0 * r
            lam = 1.0 / (1.0 + e / alpha)
            worst = max(worst, abs(rate_two_sided(e, lam, r, alpha) - (1.0 - 1.0 / (2.0 * r / alpha + 1.0) ** 2)))
        return _result("rate formula at eta = 2 rho", 1e-12, worst)

    return [_guarded(c.__name__, c) for c in (linear_map, norm_ratio, rate_bound, simplified_rate)]


def lyapunov_suite(rng: np.random.Generator, samples: int = 100) -> list[CheckResult]:
    quadratic = _quadratic()
    figure1 = make_figure1_problem(10.0)
    families = ((quadratic, QUADRATIC["eta"]), (figure1, FIGURE1_ETA))

    def sign():
        lowest = np.inf
        for problem, eta in families:
            for z in SAMPLE_BOX.sample(rng, samples):
                lowest = min(lowest, lyapunov(problem, z, eta))
        return _result(f"nonnegative at {2 * samples} points", 1e-8, -lowest)

    def zero_iff_stationary():
        worst = 0.0
        misses = 0
        for problem, eta in families:
            worst = max(worst, abs(lyapunov(problem, np.zeros(problem.dim), eta)))
            for z in SAMPLE_BOX.sample(rng, 20):
                if problem.grad_norm(z) > 1e-3 and lyapunov(problem, z, eta) <= 1e-12:
                    misses += 1
        return _result("zero exactly at stationary points", 1e-10, worst + misses, f"{misses} nonstationary zeros")

    def quadratic_recurrence():
        eta = QUADRATIC["eta"]
        alpha = dominance(quadratic, np.zeros(2), eta).alpha
        worst = max(
            abs(lyapunov_recurrence_slack(quadratic, z, eta, alpha)) for z in rng.uniform(-1.0, 1.0, size=(20, 2))
        )
        return _result("recurrence holds with equality on the quadratic", 1e-6, worst)

    def figure1_recurrence():
        alpha = dominance_over_box(figure1, FIGURE1_BOX, FIGURE1_ETA).alpha
        lowest = min(
            lyapunov_recurrence_slack(figure1, z, FIGURE1_ETA, alpha) for z in SAMPLE_BOX.sample(rng, 50)
        )
        return _result("recurrence slack on figure1 with grid alpha", 1e-6, -lowest, f"alpha={alpha:.6g}")

    def near_convex_cap():
        eta, rho = 1.0, 0.05
        worst = 0.0
        for a in (0.1, 0.2, 0.5):
            problem = RotationalQuadratic(rho, a)
            for z in rng.uniform(-1.0, 1.0, size=(20, 2)):
                z_next = ppm_step(problem, z, eta, 1.0)
                rise = lyapunov(problem, z_next, eta) - lyapunov(problem, z, eta)
                lipschitz = max(problem.grad_norm(z), problem.grad_norm(z_next))
                worst = max(worst, rise - divergence_cap(eta, rho, lipschitz))
        return _result("Lyapunov increase below the near-convex cap", 1e-6, worst)

    def one_side_smoothing():
        h = 1e-3
        worst = 0.0
        for z in SAMPLE_BOX.sample(rng, 20):
            x, y = figure1.split(z)

            def smoothed(shift: float) -> float:
                return partial_moreau_x(figure1, np.concatenate([x, y + shift]), FIGURE1_ETA, 1e-11).value

            curvature = (smoothed(h) - 2.0 * smoothed(0.0) + smoothed(-h)) / h**2
            u = partial_moreau_x(figure1, z, FIGURE1_ETA, 1e-11).arg
            alpha_y = dominance(figure1, np.concatenate([u, y]), FIGURE1_ETA).alpha_y
            worst = max(worst, curvature + alpha_y)
        return _result("x-smoothing curvature in y below minus alpha_y", 1e-4, worst)

    suite = (sign, zero_iff_stationary, quadratic_recurrence, figure1_recurrence, near_convex_cap, one_side_smoothing)
    return [_guarded(c.__name__, c) for c in suite]


SUITES: dict[Suite, Callable[[np.random.Generator], list[CheckResult]]] = {
    Suite.PROBLEMS: problems_suite,
    Suite.NUMERICS: numerics_suite,
    Suite.PROX: prox_suite,
    Suite.ENVELOPE: envelope_suite,
    Suite.QUADRATIC: quadratic_suite,
    Suite.LYAPUNOV: lyapunov_suite,
}


def resolve_suite(name: str) -> Suite:
    try:
        return Suite(name)
    except ValueError:
        known = ", ".join(s.value for s in Suite)
        raise ConfigError(f"unknown suite '{name}', expected one of: {known}") from None


def run_suite(suite: Suite | str, seed: int = 0) -> SuiteReport:
    suite = resolve_suite(suite) if isinstance(suite, str) else suite
    selected = list(SUITES) if suite == Suite.ALL else [suite]
    checks = []
    for member in selected:
        LOG.info(f"running suite '{member.value}'")
        checks += SUITES[member](np.random.default_rng(seed))
    report = SuiteReport(suite=suite.value, passed=all(c.passed for c in checks), seed=seed, checks=checks)
    for check in checks:
        if not check.passed:
            LOG.warning(f"check failed: {check.name} (slack {check.slack:.3e})")
    return report


def cmd_check(suite: str, out: Optional[str] = None, seed: int = 0) -> int:
    """Write check_<suite>.json; exit 0 when every check holds, 3 otherwise."""
    try:
        report = run_suite(suite, seed)
    except SaddleError as e:
        LOG.error(e.detail)
        return e.exit_code
    directory = out or get_settings().OUTPUT_DIR
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"check_{report.suite}.json")
    with open(path, "w") as f:
        f.write(dump_json(report))
    failed = sum(not c.passed for c in report.checks)
    LOG.info(f"suite '{report.suite}': {len(report.checks) - failed} of {len(report.checks)} checks hold, report at {path}")
    return 0 if report.passed else 3
