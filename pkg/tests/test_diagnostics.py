import numpy as np
import pytest

from src.algorithms.enums import Termination
from src.algorithms.schemas import AlgoConfig, Trajectory
from src.algorithms.service import ppm_step, run
from src.diagnostics.enums import RegimeTag
from src.diagnostics.initialization import init_weak, weak_regime_check
from src.diagnostics.service import (
    classify,
    damping_cap,
    divergence_cap,
    lambda_bound_two_sided,
    lyapunov,
    lyapunov_recurrence_slack,
    measured_contraction,
    moreau_lower_curvature,
    primal_dual_gap,
    quadratic_oracle,
    rate_two_sided,
    squared_distance_ratios,
    stationarity_bounds,
    suggest_one_sided_params,
    visited_box,
    weak_regime_contraction,
)
from src.envelope.models import SaddleEnvelopeProblem
from src.envelope.service import dominance, dominance_over_box
from src.exceptions import ParameterError
from src.problems.models import CoupledSeparable, RotationalQuadratic
from src.problems.service import FIGURE1_BOX
from src.prox.service import partial_moreau_x


def synthetic(iterates, grad_norm, termination=Termination.BUDGET, grad_tol=1e-8) -> Trajectory:
    iterates = np.asarray(iterates, dtype=float)
    return Trajectory(
        n=1,
        iterates=iterates,
        grad_norm=np.asarray(grad_norm, dtype=float),
        step_norm=np.zeros(len(iterates)),
        config=AlgoConfig(scheme="gda", s=0.1),
        termination=termination,
        grad_tol=grad_tol,
        diverge_radius=1e8,
    )


def test_quadratic_oracle_values():
    half = quadratic_oracle(1.0, 2.0, 3.0, 0.5)
    assert half.alpha == pytest.approx(1.0)
    assert (half.C, half.D) == (pytest.approx(0.875), pytest.approx(0.375))
    assert half.converges and not half.cycles
    boundary = quadratic_oracle(1.0, 2.0, 3.0, 0.8)
    assert boundary.factor == pytest.approx(1.0, abs=1e-12)
    assert boundary.cycles and not boundary.converges
    undamped = quadratic_oracle(1.0, 2.0, 3.0, 1.0)
    assert (undamped.C, undamped.D) == (pytest.approx(0.75), pytest.approx(0.75))
    assert not undamped.converges
    assert quadratic_oracle(1.0, 2.0, 3.0, 0.79).factor == pytest.approx(0.9950625)
    np.testing.assert_allclose(half.matrix() @ [1.0, 0.0], [0.875, 0.375])


def test_oracle_requires_eta_above_rho():
    with pytest.raises(ParameterError):
        quadratic_oracle(1.0, 2.0, 1.0, 0.5)


def test_rate_bounds():
    assert damping_cap(3.0, 1.0) == 1.0
    assert damping_cap(1.5, 1.0) == pytest.approx(0.25)
    assert damping_cap(1.0, -1.0) == 1.0
    assert lambda_bound_two_sided(3.0, 1.0, 1.0) == pytest.approx(0.5)
    assert rate_two_sided(3.0, 0.5, 1.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        rate_two_sided(3.0, 0.6, 1.0, 1.0)
    with pytest.raises(ParameterError):
        lambda_bound_two_sided(3.0, 1.0, -0.5)


@pytest.mark.parametrize("rho, alpha", [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)])
def test_rate_at_eta_twice_rho(rho, alpha):
    eta = 2.0 * rho
    lam = 1.0 / (1.0 + eta / alpha)
    assert rate_two_sided(eta, lam, rho, alpha) == pytest.approx(1.0 - 1.0 / (2.0 * rho / alpha + 1.0) ** 2, abs=1e-12)


def test_measured_contraction_stays_below_the_rate(quadratic):
    alpha = quadratic_oracle(1.0, 2.0, 3.0, 1.0).alpha
    for lam in (0.1, 0.3, 0.5):
        factor = rate_two_sided(3.0, lam, 1.0, alpha)
        traj = run(quadratic, AlgoConfig(scheme="ppm", eta=3.0, lambda_=lam, max_iter=100), [1.0, -0.5])
        assert np.all(squared_distance_ratios(traj, [0.0, 0.0]) <= factor + 1e-9)


def test_one_sided_parameters():
    lam, gamma = suggest_one_sided_params(3.0, 1.0, 1.0)
    assert 0 < lam <= 1 and 0 < gamma <= 1
    assert lam == pytest.approx(1.0 / 16.0)
    with pytest.raises(ParameterError):
        suggest_one_sided_params(3.0, 1.0, 1.0, c_multiplier=0.0)


def test_curvature_helpers():
    assert moreau_lower_curvature(3.0, 1.0) == pytest.approx(-1.5)
    assert moreau_lower_curvature(3.0, 0.0) == 0.0
    assert weak_regime_contraction(0.5, 3.0, 1.0, 2.0) == pytest.approx(rate_two_sided(3.0, 0.5, 1.0, 1.0))
    assert divergence_cap(2.0, 1.0, 1.0) == pytest.approx(1.0 / 8.0 * 3.0)


def test_stationarity_bounds(quadratic):
    c1, c2 = stationarity_bounds(quadratic, 3.0)
    assert c1 == pytest.approx(1.0 + np.sqrt(5.0) / 3.0)
    assert c2 == pytest.approx(1.5)


def test_lyapunov_values(quadratic):
    assert lyapunov(quadratic, [1.0, 0.0], 3.0) == pytest.approx(1.25, abs=1e-12)
    assert lyapunov(quadratic, [0.0, 0.0], 3.0) == pytest.approx(0.0, abs=1e-14)


def test_lyapunov_is_nonnegative(quadratic, figure1, rng):
    for problem, eta in ((quadratic, 3.0), (figure1(10.0), 40.0), (figure1(1.0), 40.0)):
        for z in rng.uniform(-3.0, 3.0, size=(30, 2)):
            assert lyapunov(problem, z, eta) >= -1e-8


def test_lyapunov_approaches_the_gap():
    problem = RotationalQuadratic(rho=-1.0, a=2.0)
    assert primal_dual_gap(problem, [1.0, 0.0]) == pytest.approx(2.5)
    assert lyapunov(problem, [1.0, 0.0], 1e-3) == pytest.approx(2.5, rel=1e-2)
    with pytest.raises(ParameterError):
        primal_dual_gap(RotationalQuadratic(rho=1.0, a=2.0), [1.0, 0.0])


def test_recurrence_is_tight_on_quadratic(quadratic, rng):
    for z in rng.uniform(-1.0, 1.0, size=(10, 2)):
        assert lyapunov_recurrence_slack(quadratic, z, 3.0, alpha=1.0) == pytest.approx(0.0, abs=1e-6)


def test_recurrence_on_figure1_with_grid_alpha(figure1, rng):
    problem = figure1(10.0)
    alpha = dominance_over_box(problem, FIGURE1_BOX, 40.0).alpha
    for z in rng.uniform(-3.0, 3.0, size=(10, 2)):
        assert lyapunov_recurrence_slack(problem, z, 40.0, alpha) >= -1e-6


def test_classify_converged_and_diverged():
    traj = synthetic([[1.0, 0.0], [0.0, 0.0]], [1.0, 0.0], termination=Termination.CONVERGED)
    label = classify(traj)
    assert label.tag == RegimeTag.CONVERGED
    assert label.point == [0.0, 0.0]
    assert classify(synthetic([[1.0, 0.0], [1e9, 0.0]], [1.0, 1e9], Termination.DIVERGED)).tag == RegimeTag.DIVERGED


def test_classify_cycle():
    k = np.arange(1000)
    circle = np.column_stack([np.cos(2 * np.pi * k / 10), np.sin(2 * np.pi * k / 10)])
    label = classify(synthetic(circle, np.ones(1000)), burn_in=100, window=400)
    assert label.tag == RegimeTag.CYCLE
    assert label.period % 10 == 0
    assert label.radius == pytest.approx(1.0)


def test_classify_rejects_slow_spiral():
    k = np.arange(1000)
    decay = 0.99**k
    spiral = decay[:, None] * np.column_stack([np.cos(2 * np.pi * k / 10), np.sin(2 * np.pi * k / 10)])
    label = classify(synthetic(spiral, decay), burn_in=100, window=400)
    assert label.tag == RegimeTag.UNDETERMINED


def test_classify_rejects_ppm_just_inside_the_damping_boundary(quadratic):
    oracle = quadratic_oracle(1.0, 2.0, 3.0, 0.7999)
    assert oracle.converges
    traj = run(quadratic, AlgoConfig(scheme="ppm", eta=3.0, lambda_=0.7999, max_iter=1000), [1.0, 0.0])
    assert traj.termination == Termination.BUDGET
    assert classify(traj, burn_in=100, window=400).tag == RegimeTag.UNDETERMINED


def test_classify_ppm_on_the_damping_boundary_cycles(quadratic):
    traj = run(quadratic, AlgoConfig(scheme="ppm", eta=3.0, lambda_=0.8, max_iter=1000), [1.0, 0.0])
    label = classify(traj, burn_in=100, window=400)
    assert label.tag == RegimeTag.CYCLE
    assert label.radius == pytest.approx(1.0, rel=1e-2)


def test_classify_short_run_is_undetermined():
    label = classify(synthetic([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0]), burn_in=500, window=400)
    assert label.tag == RegimeTag.UNDETERMINED


def test_trajectory_measures():
    grads = 0.5 ** np.arange(11)
    traj = synthetic(np.column_stack([grads, grads]), grads)
    assert measured_contraction(traj) == pytest.approx(0.5)
    box = visited_box(traj)
    assert box.lower == [grads[-1], grads[-1]]
    assert box.upper == [1.0, 1.0]
    np.testing.assert_allclose(squared_distance_ratios(traj, [0.0, 0.0]), 0.25)


def test_weak_regime_pipeline(figure1):
    problem, eta = figure1(1.0), 40.0
    z0 = init_weak(problem, [1.5, 1.5], eta)
    # block optima: x0 minimizes L(·, 1.5), y0 maximizes L(1.5, ·)
    assert abs(problem.grad_x([z0.x[0], 1.5])) < 1e-6
    assert abs(problem.grad_y([1.5, z0.y[0]])) < 1e-6
    report = weak_regime_check(problem, [1.5, 1.5], z0, eta)
    assert report.psd_ok
    assert report.alpha0 > 30.0
    assert 0.0 < report.lambda_max < 1.0
    assert report.r > 0 and report.R > report.r

    lam = report.lambda_max / 2.0
    traj = run(problem, AlgoConfig(scheme="ppm", eta=eta, lambda_=lam, max_iter=3000), z0)
    assert traj.termination == Termination.CONVERGED
    assert np.linalg.norm(traj.final - z0.stack()) < 1.0
    bound = np.sqrt(weak_regime_contraction(lam, eta, problem.rho, report.alpha0))
    assert measured_contraction(traj) <= bound


def test_init_weak_rejects_bad_eta(figure1):
    with pytest.raises(ParameterError):
        init_weak(figure1(1.0), [1.5, 1.5], 0.0)


@pytest.mark.parametrize("a", [0.1, 0.2])
def test_lyapunov_rise_stays_below_the_divergence_cap(rng, a):
    eta, rho = 1.0, 0.05
    problem = RotationalQuadratic(rho=rho, a=a)
    for z in rng.uniform(-1.0, 1.0, size=(20, 2)):
        z_next = ppm_step(problem, z, eta, 1.0)
        rise = lyapunov(problem, z_next, eta) - lyapunov(problem, z, eta)
        lipschitz = max(problem.grad_norm(z), problem.grad_norm(z_next))
        assert rise <= divergence_cap(eta, rho, lipschitz) + 1e-6


def test_x_smoothing_curvature_in_y_is_bounded_by_alpha_y(figure1, rng):
    problem, eta, h = figure1(10.0), 40.0, 1e-3
    for z in rng.uniform(-3.0, 3.0, size=(10, 2)):
        x, y = problem.split(z)

        def smoothed(shift):
            return partial_moreau_x(problem, np.concatenate([x, y + shift]), eta, 1e-11).value

        curvature = (smoothed(h) - 2.0 * smoothed(0.0) + smoothed(-h)) / h**2
        u = partial_moreau_x(problem, z, eta, 1e-11).arg
        assert curvature <= -dominance(problem, np.concatenate([u, y]), eta).alpha_y + 1e-4


def test_dominance_sign_decides_ppm_contraction_across_a():
    eta, rho = 3.0, 1.0
    for a in np.linspace(0.2, 3.0, 20):
        problem = RotationalQuadratic(rho=rho, a=a)
        alpha = dominance(problem, [0.0, 0.0], eta).alpha
        ratios = {
            lam: squared_distance_ratios(
                run(problem, AlgoConfig(scheme="ppm", eta=eta, lambda_=lam, max_iter=200), [1.0, 0.0]),
                [0.0, 0.0],
            )
            for lam in (0.05, 0.1, 0.25, 0.5, 0.75, 1.0)
        }
        if alpha <= 0:
            assert all(np.all(r > 1.0) for r in ratios.values()), a
        else:
            assert any(np.all(r < 1.0) for r in ratios.values()), a


@pytest.fixture
def one_sided():
    """alpha_x < 0 near x = 0 while alpha_y > 3 on the whole box; rho = 1."""
    return CoupledSeparable([0.0, 0.0, -0.5, 0.0, 0.25], [0.0, 0.0, 1.5], [[1.0]], FIGURE1_BOX)


def test_one_sided_problem_has_mixed_dominance(one_sided):
    eta = 2.0
    assert one_sided.rho == pytest.approx(1.0)
    at_origin = dominance(one_sided, [0.0, 0.0], eta)
    assert at_origin.alpha_x == pytest.approx(-0.8)
    assert dominance_over_box(one_sided, FIGURE1_BOX, eta).alpha_y >= 3.0


def test_one_sided_parameters_drive_ppm2_and_gda2_to_stationarity(one_sided):
    eta = 2.0
    alpha_y = dominance_over_box(one_sided, FIGURE1_BOX, eta).alpha_y
    lam, gamma = suggest_one_sided_params(eta, one_sided.rho, alpha_y)
    assert lam == pytest.approx((alpha_y / (alpha_y + eta)) ** 2)
    assert gamma == 1.0

    config = AlgoConfig(scheme="ppm2", eta=eta, lambda_=lam, gamma=gamma, grad_tol=1e-8, max_iter=5000)
    traj = run(one_sided, config, [1.0, 0.5])
    assert traj.termination == Termination.CONVERGED
    assert one_sided.grad_norm(traj.final) <= 1e-6

    envelope = SaddleEnvelopeProblem(one_sided, eta, tol=1e-12)
    config = AlgoConfig(scheme="gda2", eta_x=eta / lam, eta_y=eta / gamma, grad_tol=1e-9, max_iter=5000)
    traj = run(envelope, config, [1.0, 0.5])
    assert traj.termination == Termination.CONVERGED
    assert one_sided.grad_norm(traj.final) <= 1e-6
