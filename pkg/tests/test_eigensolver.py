import math

import numpy as np
import pytest

from lab import eigensolver, radial
from lab.ckn_core import validate_params
from lab.errors import ConvergenceError

# first zero of the Bessel function J_{3/2}, squared: lambda1 of the unit ball in R^5
BALL5_LAMBDA1 = 20.1907286


def test_unit_ball_in_r3(bn3, grid_1024):
    pair = eigensolver.first_eigenpair(bn3, grid_1024)
    assert pair.converged
    assert pair.lambda1 == pytest.approx(math.pi ** 2, rel=1e-2)
    assert pair.e1.is_dirichlet
    assert (pair.e1.values >= 0).all()


@pytest.mark.slow
def test_unit_ball_in_r3_fine_grid(bn3):
    pair = eigensolver.first_eigenpair(bn3, radial.default_grid(1.0, 4096))
    assert pair.lambda1 == pytest.approx(math.pi ** 2, rel=1e-3)


@pytest.mark.slow
def test_unit_ball_in_r5(bn5):
    pair = eigensolver.first_eigenpair(bn5, radial.default_grid(1.0, 4096))
    assert pair.lambda1 == pytest.approx(BALL5_LAMBDA1, rel=1e-3)


def test_refinement_reduces_error(bn3):
    errors = [abs(eigensolver.first_eigenpair(bn3, radial.default_grid(1.0, count)).lambda1
                  - math.pi ** 2) for count in (256, 1024)]
    assert errors[1] < errors[0]


def test_dilation_law():
    weighted = validate_params(4, 2.0, 0.3, 0.5, 1.2)
    count = 256
    ratio = radial.default_ratio(count)
    unit = eigensolver.first_eigenpair(weighted, radial.build_grid(1.0, count, ratio))
    double = eigensolver.first_eigenpair(weighted, radial.build_grid(2.0, count, ratio))
    # Phi scales like R^(n-ap-p) and J like R^(n-(a+1)p+c)
    assert double.lambda1 * 2.0 ** weighted.c == pytest.approx(unit.lambda1, rel=1e-6)


def test_matches_linear_pencil(small_grid):
    params = validate_params(4, 2.0, 0.3, 0.5, 1.2)
    pair = eigensolver.first_eigenpair(params, small_grid, tol=1e-12)
    assert pair.lambda1 == pytest.approx(eigensolver.dense_eigenvalue(params, small_grid),
                                         rel=1e-6)


def test_linear_pencil_needs_p2(weighted, small_grid):
    with pytest.raises(ValueError):
        eigensolver.dense_eigenvalue(weighted, small_grid)


def test_quotient_bounds_rayleigh_of_start(weighted, small_grid):
    pair = eigensolver.first_eigenpair(weighted, small_grid, max_iters=5000)
    start = radial.make_field(small_grid, eigensolver.parabola(small_grid))
    assert pair.lambda1 <= eigensolver.rayleigh_lambda(weighted, small_grid, start)
    assert eigensolver.rayleigh_lambda(weighted, small_grid, pair.e1) == pytest.approx(
        pair.lambda1, rel=1e-9)


def test_strict_mode_reports_best_iterate(bn3, small_grid):
    with pytest.raises(ConvergenceError) as info:
        eigensolver.first_eigenpair(bn3, small_grid, tol=1e-300, max_iters=2, strict=True)
    assert info.value.result.iterations == 2
    assert not info.value.result.converged


def test_rayleigh_lambda_of_zero_field(bn3, small_grid):
    zero = radial.make_field(small_grid, [0.0] * small_grid.size)
    with pytest.raises(ZeroDivisionError):
        eigensolver.rayleigh_lambda(bn3, small_grid, zero)


@pytest.mark.slow
def test_lumped_eigenvalues_rise_to_the_limit(bn3):
    values = [eigensolver.first_eigenpair(bn3, radial.default_grid(1.0, count), tol=1e-12).lambda1
              for count in (1024, 2048, 4096)]
    # the lumped mass overestimates J, so the discrete values sit below pi^2
    assert values[0] < values[1] < values[2] <= math.pi ** 2


def test_descent_falls_back_to_scaled_gradient(bn3, small_grid, monkeypatch):
    problem = eigensolver.RayleighProblem(bn3, small_grid)
    solve = problem.direction
    monkeypatch.setattr(problem, 'direction', lambda gradient: -solve(gradient))
    start = eigensolver.parabola(small_grid)
    u, value, iterations, _, _ = problem.descend(start, max_iters=50)
    assert iterations >= 1
    assert np.all(u >= 0.0) and u[-1] == 0.0
    assert value < problem.quotient(problem.normalize(start))


def test_stalled_line_search_is_not_convergence(bn3, small_grid, monkeypatch):
    problem = eigensolver.RayleighProblem(bn3, small_grid)
    monkeypatch.setattr(problem, 'quotient', lambda u: 1.0)
    _, value, iterations, _, converged = problem.descend(eigensolver.parabola(small_grid))
    assert value == 1.0
    assert iterations == 1
    assert not converged
