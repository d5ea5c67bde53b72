import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lab import radial
from lab.ckn_core import validate_params
from lab.errors import GridError, IntegrabilityError
from tests.strategies import admissible_params


def test_default_grid_layout():
    grid = radial.default_grid(2.0, 1024)
    assert grid.size == 1024
    assert grid.nodes[0] == 0.0
    assert grid.nodes[-1] == 2.0
    assert np.all(np.diff(grid.nodes) > 0)
    assert grid.nodes[1] == pytest.approx(2.0 * grid.ratio ** (-1022))
    assert grid.nodes[1] / grid.R == pytest.approx(1e-12 * grid.ratio, rel=1e-9)


@pytest.mark.parametrize('R, count, ratio', [
    (0.0, 64, 1.1),
    (1.0, 8, 1.1),
    (1.0, 64.5, 1.1),
    (1.0, 64, 1.0),
])
def test_build_grid_rejects(R, count, ratio):
    with pytest.raises(GridError):
        radial.build_grid(R, count, ratio)


def test_make_field_checks_shape_and_values(small_grid):
    with pytest.raises(GridError):
        radial.make_field(small_grid, np.ones(10))
    values = np.ones(small_grid.size)
    values[3] = np.nan
    with pytest.raises(GridError):
        radial.make_field(small_grid, values)
    field = radial.make_field(small_grid, np.ones(small_grid.size), dirichlet=True)
    assert field.is_dirichlet


def test_lumped_weights_integrate_constants_exactly(small_grid):
    volume = radial.integrate_nodal(small_grid, np.ones(small_grid.size), 3, 0.0)
    assert volume == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)
    # singular weight |x|^(-2) in R^3
    singular = radial.integrate_nodal(small_grid, np.ones(small_grid.size), 3, 2.0)
    assert singular == pytest.approx(4.0 * math.pi, rel=1e-12)


def test_quadratic_rule_is_exact_for_quadratics(small_grid):
    values = small_grid.nodes ** 2
    value = radial.integrate_nodal(small_grid, values, 3, 0.5, order=2)
    # 4 pi int_0^1 r^(2-0.5) r^2 dr
    assert value == pytest.approx(4.0 * math.pi / 4.5, rel=1e-10)
    with pytest.raises(ValueError):
        radial.integrate_nodal(small_grid, values, 3, 0.0, order=3)


def test_nonintegrable_weight_is_refused(small_grid):
    with pytest.raises(IntegrabilityError):
        radial.integrate_nodal(small_grid, np.ones(small_grid.size), 3, 3.0)


def test_upto_restricts_to_inner_ball(small_grid):
    inner = radial.integrate_nodal(small_grid, np.ones(small_grid.size), 3, 0.0, upto=0.5)
    assert 0 < inner < 4.0 * math.pi / 3.0
    radius = small_grid.nodes[small_grid.nodes <= 0.5][-1]
    assert inner == pytest.approx(4.0 * math.pi / 3.0 * radius ** 3, rel=1e-3)


def test_energy_phi_of_parabola(bn3):
    grid = radial.default_grid(1.0, 2048)
    field = radial.sample(grid, lambda r: 1.0 - r ** 2, dirichlet=True)
    # int |2r|^2 4 pi r^2 dr = 16 pi / 5
    assert radial.energy_phi(bn3, grid, field) == pytest.approx(16.0 * math.pi / 5.0, rel=1e-3)


def test_boundary_slope_is_exact_for_quadratics(small_grid):
    field = radial.sample(small_grid, lambda r: 3.0 - 2.0 * r + 0.5 * r ** 2)
    assert radial.boundary_slope(small_grid, field) == pytest.approx(-1.0, rel=1e-9)


def test_flux_pairing_is_the_energy_gradient(weighted):
    grid = radial.build_grid(1.0, 32, 1.3)
    values = 1.0 - grid.nodes ** 2 + 0.1 * grid.nodes
    analytic = weighted.p * radial.flux_pairing(weighted, grid, values)
    step = 1e-6
    for i in (0, 5, 17, 30):
        up, down = values.copy(), values.copy()
        up[i] += step
        down[i] -= step
        numeric = (radial.energy_phi(weighted, grid, radial.make_field(grid, up))
                   - radial.energy_phi(weighted, grid, radial.make_field(grid, down))) / (2 * step)
        assert analytic[i] == pytest.approx(numeric, rel=1e-5, abs=1e-9)


def test_flux_pairing_handles_flat_cells():
    params = validate_params(3, 1.5, 0.0, 0.0, 1.0)
    grid = radial.build_grid(1.0, 32, 1.3)
    values = np.ones(grid.size)
    values[-1] = 0.0
    pairing = radial.flux_pairing(params, grid, values)
    assert np.all(np.isfinite(pairing))
    assert np.all(pairing[:-2] == 0.0)


def test_energy_total_and_rayleigh(bn3, small_grid):
    field = radial.sample(small_grid, lambda r: 1.0 - r ** 2, dirichlet=True)
    phi = radial.energy_phi(bn3, small_grid, field)
    mass = radial.q_integral(bn3, small_grid, field)
    j = radial.energy_j(bn3, small_grid, field)
    assert radial.energy_total(bn3, small_grid, field, 0.5) == pytest.approx(
        phi / 2 - mass / 6 - 0.25 * j)
    assert radial.rayleigh_ckn(bn3, small_grid, field) == pytest.approx(phi / mass ** (1 / 3))
    zero = radial.make_field(small_grid, np.zeros(small_grid.size))
    with pytest.raises(ZeroDivisionError):
        radial.rayleigh_ckn(bn3, small_grid, zero)
    assert radial.mass_fraction(bn3, small_grid, zero, 0.5) == 0.0


def test_tangent_stiffness_reduces_to_preconditioner_for_p2(bn3, small_grid):
    values = 1.0 - small_grid.nodes ** 2
    np.testing.assert_allclose(radial.stiffness_banded(bn3, small_grid, values=values),
                               radial.stiffness_banded(bn3, small_grid))


def test_cone_norms(bn3, grid_1024):
    cone = radial.sample(grid_1024, lambda r: 1.0 - r, dirichlet=True)
    # |D(1-r)| = 1, so Phi is the volume of the unit ball
    assert radial.energy_phi(bn3, grid_1024, cone) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)
    # 4 pi int r^2 (1-r)^2 dr
    assert radial.energy_j(bn3, grid_1024, cone) == pytest.approx(2.0 * math.pi / 15.0, rel=5e-3)
    square = (1.0 - grid_1024.nodes) ** 2
    assert radial.integrate_nodal(grid_1024, square, 3, 0.0, order=2) == pytest.approx(
        2.0 * math.pi / 15.0, rel=1e-10)


@pytest.mark.parametrize('alpha, s, expected', [
    (1.0, 2.0, 2.0 * math.pi),
    (2.5, 1.0, 8.0 * math.pi),
])
def test_weighted_integral_of_constants(grid_1024, alpha, s, expected):
    ones = radial.make_field(grid_1024, np.ones(grid_1024.size))
    assert radial.weighted_integral(grid_1024, ones, alpha, s, 3) == pytest.approx(expected, rel=1e-10)


def test_functionals_are_homogeneous(weighted, small_grid, rng):
    values = np.sort(rng.random(small_grid.size))[::-1]
    field = radial.make_field(small_grid, values, dirichlet=True)
    q = 1.0 / (1.0 / weighted.p - weighted.d / weighted.n)
    phi = radial.energy_phi(weighted, small_grid, field)
    j = radial.energy_j(weighted, small_grid, field)
    mass = radial.q_integral(weighted, small_grid, field)
    for t in rng.uniform(0.1, 10.0, size=5):
        scaled = field.scaled(t)
        assert radial.energy_phi(weighted, small_grid, scaled) == pytest.approx(t ** weighted.p * phi)
        assert radial.energy_j(weighted, small_grid, scaled) == pytest.approx(t ** weighted.p * j)
        assert radial.q_integral(weighted, small_grid, scaled) == pytest.approx(
            t ** q * mass, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(admissible_params(), st.floats(min_value=0.1, max_value=10.0))
def test_functionals_follow_dilation(params, s):
    unit = radial.build_grid(1.0, 64, 1.3)
    wide = radial.build_grid(s, 64, 1.3)
    profile = (1.0 - unit.nodes ** 2) * (1.0 + 0.3 * np.cos(5.0 * unit.nodes))
    # the same nodal values on the dilated mesh are u(./s)
    small = radial.make_field(unit, profile, dirichlet=True)
    large = radial.make_field(wide, profile, dirichlet=True)
    n, p, a, b, c = params.n, params.p, params.a, params.b, params.c
    q = n * p / (n - params.d * p)
    assert radial.energy_phi(params, wide, large) == pytest.approx(
        s ** (n - p - a * p) * radial.energy_phi(params, unit, small), rel=1e-9)
    assert radial.energy_j(params, wide, large) == pytest.approx(
        s ** (n - (a + 1.0) * p + c) * radial.energy_j(params, unit, small), rel=1e-9)
    assert radial.q_integral(params, wide, large) == pytest.approx(
        s ** (n - b * q) * radial.q_integral(params, unit, small), rel=1e-9)
