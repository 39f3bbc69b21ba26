import numpy as np
import pytest

from src.envelope.models import SaddleEnvelopeProblem
from src.envelope.service import (
    curvature_bounds,
    dominance,
    dominance_over_box,
    envelope_evaluate,
    envelope_grad,
    envelope_hessian,
    envelope_smoothness,
    envelope_value,
)
from src.exceptions import ParameterError
from src.numerics.service import sym_eig_max, sym_eig_min
from src.problems.schemas import Box
from src.problems.service import FIGURE1_BOX, gradient_fd_error, hessian_fd_error
from src.prox.service import prox


def test_quadratic_envelope_value_and_gradient(quadratic):
    z = [1.0, 0.0]
    assert envelope_value(quadratic, z, 3.0) == pytest.approx(0.375, abs=1e-12)
    g = envelope_grad(quadratic, z, 3.0)
    np.testing.assert_allclose(g.vector, [0.75, 2.25], atol=1e-12)
    np.testing.assert_allclose(g.cross_check, g.vector, atol=1e-10)


def test_envelope_evaluate_shares_one_prox(quadratic):
    result = envelope_evaluate(quadratic, [1.0, 0.0], 3.0)
    np.testing.assert_allclose(result.prox.vector, [0.75, 0.75], atol=1e-12)
    assert result.value == pytest.approx(0.375, abs=1e-12)
    assert result.gradient.norm() == pytest.approx(np.hypot(0.75, 2.25))


def test_quadratic_envelope_hessian(quadratic):
    H = envelope_hessian(quadratic, [0.3, -0.2], 3.0)
    np.testing.assert_allclose(H.full, [[0.75, 2.25], [2.25, -0.75]], atol=1e-12)
    assert H.schur_gap <= 1e-12


def test_quadratic_dominance_is_constant(quadratic):
    for z in ([0.0, 0.0], [5.0, -3.0]):
        report = dominance(quadratic, z, 3.0)
        assert report.alpha_x == pytest.approx(1.0)
        assert report.alpha_y == pytest.approx(1.0)
    box = dominance_over_box(quadratic, Box.cube(-4.0, 4.0, 2), 3.0)
    assert box.certified
    assert box.samples == 1
    assert box.alpha == pytest.approx(1.0)


def test_figure1_dominance_regimes(figure1):
    weak = dominance_over_box(figure1(1.0), FIGURE1_BOX, 40.0)
    assert not weak.certified
    assert weak.alpha < 0
    strong = dominance(figure1(100.0), [0.0, 0.0], 40.0)
    # -20 + 100² / (40 - 20)
    assert strong.alpha_x == pytest.approx(480.0)
    assert strong.alpha_y == pytest.approx(480.0)


def test_dominance_requires_eta_above_rho(figure1):
    with pytest.raises(ParameterError):
        dominance(figure1(10.0), [0.0, 0.0], 20.0)
    with pytest.raises(ParameterError):
        dominance_over_box(figure1(10.0), FIGURE1_BOX, 40.0, resolution=1)


def test_curvature_bounds():
    bounds = curvature_bounds(3.0, 1.0, 1.0)
    assert bounds.mu_env == pytest.approx(0.75)
    assert bounds.beta_env == pytest.approx(3.0)
    assert curvature_bounds(3.0, -1.0, 1.0).beta_env == pytest.approx(3.0)
    assert curvature_bounds(3.0, 1.0, np.inf).mu_env == pytest.approx(3.0)
    assert curvature_bounds(3.0, 1.0, 1e12).mu_env == pytest.approx(3.0)
    with pytest.raises(ParameterError):
        curvature_bounds(3.0, 1.0, -3.0)
    with pytest.raises(ParameterError):
        curvature_bounds(1.0, 1.0, 1.0)


def test_envelope_smoothness():
    assert envelope_smoothness(40.0, 20.0) == pytest.approx(40.0)
    assert envelope_smoothness(30.0, 20.0) == pytest.approx(60.0)
    assert envelope_smoothness(3.0, 0.0) == 3.0


@pytest.mark.parametrize("a", [1.0, 10.0, 100.0])
def test_envelope_derivatives_against_finite_differences(figure1, rng, a):
    env = SaddleEnvelopeProblem(figure1(a), 40.0, tol=1e-11)
    for z in Box.cube(-3.0, 3.0, 2).sample(rng, 25):
        assert gradient_fd_error(env, z) <= 1e-5
        assert hessian_fd_error(env, z) <= 1e-4


def test_quadratic_envelope_derivatives_against_finite_differences(quadratic, rng):
    env = SaddleEnvelopeProblem(quadratic, 3.0, tol=1e-11)
    for z in rng.uniform(-3.0, 3.0, size=(25, 2)):
        assert gradient_fd_error(env, z) <= 1e-5
        assert hessian_fd_error(env, z) <= 1e-4


def test_envelope_hessian_eigenvalue_bounds(figure1, rng):
    problem, eta = figure1(10.0), 40.0
    for z in rng.uniform(-3.0, 3.0, size=(10, 2)):
        p = prox(problem, z, eta)
        report = dominance(problem, p.vector, eta)
        H = envelope_hessian(problem, z, eta, prox_result=p)
        mu_x = curvature_bounds(eta, problem.rho, report.alpha_x).mu_env
        mu_y = curvature_bounds(eta, problem.rho, report.alpha_y).mu_env
        assert sym_eig_min(H.xx) >= mu_x - 1e-6
        assert sym_eig_max(H.xx) <= eta + 1e-6
        assert sym_eig_min(-H.yy) >= mu_y - 1e-6
        assert sym_eig_max(-H.yy) <= eta + 1e-6


def test_envelope_problem_properties(figure1):
    env = SaddleEnvelopeProblem(figure1(10.0), 40.0)
    assert env.rho == pytest.approx(40.0)
    assert env.beta == pytest.approx(40.0)
    z = np.array([1.0, 2.0])
    np.testing.assert_allclose(env.grad(z), envelope_grad(figure1(10.0), z, 40.0).vector, atol=1e-7)
    assert env.prox_at(z) is env.prox_at(z.copy())
