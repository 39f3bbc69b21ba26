import numpy as np
import pytest

from src.exceptions import ConfigError, ParameterError
from src.problems.enums import ProblemName
from src.problems.models import RotationalQuadratic
from src.problems.schemas import Box, EvaluateRequest, ProblemSpec, SplitPoint
from src.problems.service import (
    build_problem,
    check_certified_constants,
    evaluate,
    finite_diff_problem,
    gradient_fd_error,
    hessian_fd_error,
)


def test_quadratic_value_and_gradient(quadratic):
    z = np.array([1.0, 1.0])
    assert quadratic.value(z) == pytest.approx(-0.5 + 2.0 + 0.5)
    np.testing.assert_allclose(quadratic.grad(z), [1.0, 3.0])
    np.testing.assert_allclose(quadratic.hessian(z), [[-1.0, 2.0], [2.0, 1.0]])


def test_quadratic_constants(quadratic):
    c = quadratic.constants()
    assert c.rho == 1.0
    assert c.beta == pytest.approx(np.sqrt(5.0))
    assert c.H == 0.0 and c.delta == 2.0 and c.xi == 0.0
    assert c.constant_hessian


def test_quadratic_in_higher_dimension():
    problem = RotationalQuadratic(rho=0.5, a=1.0, n=3)
    z = np.arange(6, dtype=float)
    assert problem.dim == 6
    x, y = problem.split(z)
    np.testing.assert_allclose(problem.grad_x(z), -0.5 * x + y)
    np.testing.assert_allclose(problem.grad_y(z), x + 0.5 * y)


def test_figure1_values(figure1):
    problem = figure1(10.0)
    # f(2) = g(2) = -15
    assert problem.value([2.0, 2.0]) == pytest.approx(-15.0 + 40.0 + 15.0)
    assert problem.value([0.0, 0.0]) == pytest.approx(0.0)
    np.testing.assert_allclose(problem.grad([0.0, 0.0]), [0.0, 0.0])


def test_figure1_certified_constants(figure1):
    problem = figure1(1.0)
    assert problem.rho == pytest.approx(20.0)
    assert problem.beta == pytest.approx(173.0)
    assert problem.H == pytest.approx(96.0)
    assert problem.delta == pytest.approx(1.0)
    assert problem.xi == 0.0


def test_figure1_uncoupled_stationary_points(figure1):
    # f'(x) = 4x(x² − 5), so with a = 0 the coordinates 0 and ±√5 combine freely
    problem = figure1(0.0)
    r = np.sqrt(5.0)
    for z in ([r, r], [-r, 0.0], [0.0, -r]):
        np.testing.assert_allclose(problem.grad(z), [0.0, 0.0], atol=1e-12)


@pytest.mark.parametrize("a", [1.0, 10.0, 100.0])
def test_figure1_derivatives_against_finite_differences(figure1, rng, a):
    problem = figure1(a)
    for z in Box.cube(-3.0, 3.0, 2).sample(rng, 20):
        assert gradient_fd_error(problem, z) <= 1e-6
        assert hessian_fd_error(problem, z) <= 1e-4


def test_certified_constants_hold(figure1, quadratic, rng):
    for problem in (figure1(10.0), quadratic):
        report = check_certified_constants(problem, rng, samples=100)
        assert report.ok
        assert report.samples == 100


def test_certified_constants_need_rho():
    problem = finite_diff_problem(lambda x, y: float(x @ y), 1, 1)
    with pytest.raises(ParameterError):
        check_certified_constants(problem, np.random.default_rng(0))


def test_finite_difference_problem_matches_quadratic(quadratic):
    def value(x, y):
        return float(-0.5 * x @ x + 2.0 * x @ y + 0.5 * y @ y)

    problem = finite_diff_problem(value, 1, 1, rho=1.0, beta=np.sqrt(5.0))
    z = np.array([0.7, -1.3])
    np.testing.assert_allclose(problem.grad(z), quadratic.grad(z), atol=1e-8)
    np.testing.assert_allclose(problem.hessian(z), quadratic.hessian(z), atol=1e-5)


def test_build_problem_registry():
    problem = build_problem(ProblemSpec(name=ProblemName.ROTATIONAL_QUADRATIC, params={"rho": 1.0, "a": 2.0}))
    assert isinstance(problem, RotationalQuadratic)
    separable = build_problem(
        ProblemSpec(
            name="coupled_separable",
            params={"f_coeffs": [0.0, 0.0, 1.0], "g_coeffs": [0.0, 0.0, 1.0], "a": 3.0, "n": 2, "m": 2},
        )
    )
    assert separable.dim == 4
    # f = g = x², so f'' = g'' = 2 and A = 3I
    assert separable.rho == pytest.approx(-2.0)
    assert separable.beta == pytest.approx(5.0)


def test_build_problem_names_the_bad_key():
    with pytest.raises(ConfigError, match="problem.params.a"):
        build_problem(ProblemSpec(name="figure1", params={"a": "strong"}))
    with pytest.raises(ConfigError, match="problem.params"):
        build_problem(ProblemSpec(name="figure1", params={"a": 1.0, "b": 2.0}))


def test_box_grid_and_sampling(rng):
    box = Box.cube(-3.5, 3.5, 2)
    grid = box.grid(5, offset=0.1)
    assert grid.shape == (25, 2)
    np.testing.assert_allclose(grid[0], [-3.4, -3.4])
    np.testing.assert_allclose(grid[1], [-3.4, -1.65])
    np.testing.assert_allclose(box.grid(1), [[0.0, 0.0]])
    samples = box.sample(rng, 50)
    assert all(box.contains(s) for s in samples)
    np.testing.assert_allclose(box.clip([5.0, -9.0]), [3.5, -3.5])


def test_box_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Box(lower=[1.0], upper=[0.0])


def test_split_point_round_trip():
    p = SplitPoint.from_vector([1.0, 2.0, 3.0], 1)
    assert p.n == 1 and p.m == 2
    np.testing.assert_allclose(p.stack(), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        SplitPoint(x=[np.nan], y=[0.0])


def test_evaluate_endpoint_payload():
    response = evaluate(
        EvaluateRequest(problem=ProblemSpec(name="rotational_quadratic", params={"rho": 1.0, "a": 2.0}), z=[1.0, 1.0])
    )
    assert response.grad_x == [1.0]
    assert response.grad_y == [3.0]
    with pytest.raises(ParameterError):
        evaluate(EvaluateRequest(problem=ProblemSpec(name="figure1", params={"a": 1.0}), z=[1.0]))
