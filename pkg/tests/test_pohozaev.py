import math

import numpy as np
import pytest

from lab import eigensolver, pohozaev, radial
from lab.ckn_core import validate_params
from lab.errors import GridError, LambdaSignError


@pytest.mark.parametrize('name, expected', [('constant', 8.0 * math.pi),
                                            ('inverse_radius', 2.0 * math.pi)])
def test_sobolev_catalog_values(bn3, grid_1024, name, expected):
    field, source = pohozaev.manufactured_case(name, bn3, grid_1024)
    report = pohozaev.pucci_serrin_check(bn3, grid_1024, field, source)
    assert report.lhs == pytest.approx(expected, rel=1e-9)
    assert report.rhs == pytest.approx(expected, rel=1e-6)
    assert report.relative < 1e-6


@pytest.mark.parametrize('args', [(4, 3.0, 0.1, 0.4, 1.5), (5, 1.5, -0.5, 0.0, 1.0),
                                  (3, 2.0, 0.3, 0.3, 2.0)])
@pytest.mark.parametrize('name', ['constant', 'inverse_radius'])
def test_weighted_catalog_balances(args, name, small_grid):
    params = validate_params(*args)
    field, source = pohozaev.manufactured_case(name, params, small_grid)
    report = pohozaev.pucci_serrin_check(params, small_grid, field, source)
    assert report.relative < 1e-8


def test_catalog_on_larger_ball(bn3):
    grid = radial.default_grid(2.0, 512)
    field, source = pohozaev.manufactured_case('constant', bn3, grid)
    report = pohozaev.pucci_serrin_check(bn3, grid, field, source)
    # 8 pi R for g = 6/R^2
    assert report.lhs == pytest.approx(16.0 * math.pi, rel=1e-9)
    assert report.relative < 1e-6


def test_trig_case_converges_under_refinement(bn3):
    relatives = []
    for count in (256, 1024):
        grid = radial.default_grid(1.0, count)
        field, source = pohozaev.manufactured_case('trig', bn3, grid)
        relatives.append(pohozaev.pucci_serrin_check(bn3, grid, field, source).relative)
    assert relatives[1] < relatives[0]
    assert relatives[1] < 1e-2


def test_trig_case_needs_unweighted_laplacian(weighted, small_grid):
    with pytest.raises(ValueError):
        pohozaev.manufactured_case('trig', weighted, small_grid)


def test_unknown_and_problem_cases(bn3, small_grid):
    with pytest.raises(ValueError, match='problem_source'):
        pohozaev.manufactured_case('problem', bn3, small_grid)
    with pytest.raises(ValueError, match='unknown'):
        pohozaev.manufactured_case('gaussian', bn3, small_grid)


def test_non_dirichlet_field_is_refused(bn3, small_grid):
    field = radial.make_field(small_grid, np.ones(small_grid.size))
    _, source = pohozaev.manufactured_case('constant', bn3, small_grid)
    with pytest.raises(GridError, match='Dirichlet'):
        pohozaev.pucci_serrin_check(bn3, small_grid, field, source)


def test_source_must_conform(bn3, small_grid):
    field, _ = pohozaev.manufactured_case('constant', bn3, small_grid)
    _, source = pohozaev.manufactured_case('constant', bn3, radial.default_grid(1.0, 256))
    with pytest.raises(GridError):
        pohozaev.pucci_serrin_check(bn3, small_grid, field, source)


def test_certificate_for_parabola(bn3, grid_1024):
    field, _ = pohozaev.manufactured_case('constant', bn3, grid_1024)
    certificate = pohozaev.nonexistence_certificate(bn3, grid_1024, field, -1.0)
    assert certificate == pytest.approx(8.0 * math.pi, rel=1e-9)
    with pytest.raises(LambdaSignError):
        pohozaev.nonexistence_certificate(bn3, grid_1024, field, 0.5)


def test_certificate_vanishes_only_for_zero(bn3, small_grid):
    zero = radial.make_field(small_grid, np.zeros(small_grid.size))
    assert pohozaev.nonexistence_certificate(bn3, small_grid, zero, 0.0) == 0.0


def test_eigenfunction_balances_at_lambda1(bn3, grid_1024):
    pair = eigensolver.first_eigenpair(bn3, grid_1024)
    report = pohozaev.pohozaev_residual(bn3, grid_1024, pair.e1, pair.lambda1)
    assert report.relative < 1e-2
    assert report.lhs_unweighted is None


def test_weighted_boundary_term_reports_unweighted_variant(small_grid):
    params = validate_params(3, 2.0, 0.3, 0.3, 2.0)
    field, _ = pohozaev.manufactured_case('constant', params, small_grid)
    report = pohozaev.pohozaev_residual(params, small_grid, field, 1.0)
    assert report.lhs_unweighted is not None
    # R = 1: the weight |x|^(-ap) is 1 on the boundary
    assert report.lhs_unweighted == pytest.approx(report.lhs)


def test_problem_source_balances_for_lambda_term_only(bn3, small_grid):
    # with q critical the nonlinear term drops out of the identity
    field, _ = pohozaev.manufactured_case('constant', bn3, small_grid)
    source = pohozaev.problem_source(bn3, small_grid, field, 0.0)
    n, shift = bn3.n, 1.0 + bn3.a - bn3.n / bn3.p
    integrand = n * source.G + source.xGx + shift * field.values * source.g
    assert np.max(np.abs(integrand)) < 1e-12 * np.max(np.abs(source.G)) + 1e-300
