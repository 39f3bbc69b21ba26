import numpy as np
import pytest

from src.exceptions import ConvergenceFailure, ParameterError
from src.numerics.service import central_gradient
from src.problems.service import finite_diff_problem
from src.prox.enums import InnerMethod
from src.prox.service import inner_solve, partial_moreau_x, partial_moreau_y, prox


def test_quadratic_prox_point(quadratic):
    result = prox(quadratic, [1.0, 0.0], eta=3.0)
    np.testing.assert_allclose(result.vector, [0.75, 0.75], atol=1e-12)
    assert result.method == InnerMethod.NEWTON
    assert result.residual <= result.tol


def test_gda_inner_solver_matches_newton(quadratic):
    newton = prox(quadratic, [1.0, 0.0], 3.0, tol=1e-12)
    gda = prox(quadratic, [1.0, 0.0], 3.0, tol=1e-12, method=InnerMethod.GDA)
    assert gda.method == InnerMethod.GDA
    np.testing.assert_allclose(gda.vector, newton.vector, atol=1e-11)
    assert gda.step_ratios
    assert max(gda.step_ratios) <= gda.contraction_bound + 1e-12


def test_gda_certificate_on_nonconvex_problem(figure1):
    problem = figure1(10.0)
    result = prox(problem, [1.2, -0.7], 40.0, tol=1e-9, method=InnerMethod.GDA)
    assert result.contraction_bound < 1.0
    assert max(result.step_ratios) <= result.contraction_bound + 1e-9
    newton = prox(problem, [1.2, -0.7], 40.0, tol=1e-9)
    np.testing.assert_allclose(result.vector, newton.vector, atol=1e-8)


def test_stationary_point_is_fixed(figure1, quadratic):
    np.testing.assert_allclose(prox(quadratic, [0.0, 0.0], 3.0).vector, [0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(prox(figure1(100.0), [0.0, 0.0], 40.0).vector, [0.0, 0.0], atol=1e-12)


@pytest.mark.parametrize("a", [1.0, 10.0, 100.0])
def test_prox_displacement_is_bounded_by_the_gradient(figure1, rng, a):
    problem, eta, tol = figure1(a), 40.0, 1e-10
    mu = eta - problem.rho
    for z in rng.uniform(-3.0, 3.0, size=(30, 2)):
        moved = np.linalg.norm(prox(problem, z, eta, tol).vector - z)
        assert moved <= (problem.grad_norm(z) + tol) / mu + 1e-12


def test_prox_point_does_not_depend_on_the_initial_guess(figure1, quadratic, rng):
    tol = 1e-10
    for problem, eta in ((quadratic, 3.0), (figure1(10.0), 40.0)):
        for z in rng.uniform(-2.5, 2.5, size=(5, 2)):
            reference = inner_solve(problem, z, eta, tol).vector
            for start in (z + 0.5 * rng.normal(size=2), -z, np.zeros(2)):
                other = inner_solve(problem, z, eta, tol, start=start).vector
                assert np.linalg.norm(other - reference) <= 10.0 * tol / (eta - problem.rho)


@pytest.mark.parametrize("eta", [1.0, 0.5, 0.0, -2.0, np.inf])
def test_eta_must_exceed_rho(quadratic, eta):
    with pytest.raises(ParameterError):
        prox(quadratic, [1.0, 0.0], eta)


def test_uncertified_problem_is_rejected():
    problem = finite_diff_problem(lambda x, y: float(x @ y), 1, 1)
    with pytest.raises(ParameterError):
        prox(problem, [1.0, 0.0], 3.0)


def test_budget_exhaustion_carries_best_iterate(figure1):
    with pytest.raises(ConvergenceFailure) as info:
        inner_solve(figure1(10.0), [2.0, 2.0], 40.0, tol=1e-12, max_iter=3, method=InnerMethod.GDA)
    assert info.value.best is not None
    assert info.value.residual > 1e-12


def test_partial_envelopes(quadratic):
    lower = partial_moreau_x(quadratic, [1.0, 1.0], 3.0)
    upper = partial_moreau_y(quadratic, [1.0, 1.0], 3.0)
    assert lower.value == pytest.approx(1.75, abs=1e-12)
    np.testing.assert_allclose(lower.arg, [0.5])
    assert upper.value == pytest.approx(4.25, abs=1e-12)
    np.testing.assert_allclose(upper.arg, [2.5])


def test_partial_envelope_gradient_identity(figure1, rng):
    problem, eta = figure1(10.0), 40.0
    for z in rng.uniform(-3.0, 3.0, size=(5, 2)):
        x, y = z[:1], z[1:]
        lower = partial_moreau_x(problem, z, eta, tol=1e-11)
        dx = central_gradient(lambda u: partial_moreau_x(problem, np.concatenate([u, y]), eta, 1e-11).value, x)
        np.testing.assert_allclose(dx, eta * (x - lower.arg), rtol=1e-5, atol=1e-5)
        upper = partial_moreau_y(problem, z, eta, tol=1e-11)
        dy = central_gradient(lambda v: partial_moreau_y(problem, np.concatenate([x, v]), eta, 1e-11).value, y)
        np.testing.assert_allclose(dy, eta * (upper.arg - y), rtol=1e-5, atol=1e-5)
