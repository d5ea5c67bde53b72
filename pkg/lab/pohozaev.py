"""Pucci-Serrin and Pohozaev identities on the ball B_R, evaluated on the radial mesh.

With the multiplier x.Du + (n/p - 1 - a)u a Dirichlet solution of
-div(|x|^(-ap)|Du|^(p-2)Du) = g(x,u) satisfies

    (1 - 1/p) * |S^(n-1)| * R^(n-ap) |u'(R)|^p
        = |S^(n-1)| * int_0^R r^(n-1) [n G + x.G_x + (1 + a - n/p) u g] dr.

Volume integrals use the second-order cell rule and u'(R) the three-point
one-sided slope, so both sides are exact for quadratic profiles.
"""
import logging

import numpy as np

from lab import radial
from lab.ckn_core import derive_exponents, sphere_area
from lab.errors import GridError, LambdaSignError
from models import IdentityReport, SourceSpec

logger = logging.getLogger(__name__)

RELATIVE_FLOOR = 1e-30
DIRICHLET_TOL = 1e-12

CATALOG = ('constant', 'inverse_radius', 'trig', 'problem')


def _check_dirichlet(grid, field):
    if field.values.shape != grid.nodes.shape:
        raise GridError('field does not live on this grid')
    scale = max(float(np.max(np.abs(field.values))), 1.0)
    if abs(field.values[-1]) > DIRICHLET_TOL * scale:
        raise GridError(f"field is not Dirichlet: u(R) = {field.values[-1]:.3e}")


def _check_source(grid, source):
    for label in ('g', 'G', 'xGx'):
        if getattr(source, label).shape != grid.nodes.shape:
            raise GridError(f"source '{source.name}' array {label} does not conform to the grid")


def boundary_term(params, grid, field, weighted=True):
    """(1 - 1/p) |S^(n-1)| R^(n-ap) |u'(R)|^p; weighted=False drops |x|^(-ap)"""
    p = params.p
    power = params.n - (params.a * p if weighted else 0.0)
    slope = radial.boundary_slope(grid, field)
    return (1.0 - 1.0 / p) * sphere_area(params.n) * grid.R ** power * abs(slope) ** p


def _report(lhs, rhs, lhs_unweighted=None):
    residual = lhs - rhs
    relative = abs(residual) / max(abs(lhs), abs(rhs), RELATIVE_FLOOR)
    return IdentityReport(lhs=lhs, rhs=rhs, residual=residual, relative=relative,
                          lhs_unweighted=lhs_unweighted)


def _power_source(name, u, g0, sigma):
    """g = g0 r^(-sigma) with G = g u and x.G_x = -sigma g u, stored times r^sigma"""
    g = np.full_like(u, g0)
    return SourceSpec(name=name, g=g, G=g * u, xGx=-sigma * g * u, singular_order=sigma)


def manufactured_case(name, params, grid):
    """Exact Dirichlet profile and its source from the built-in catalog.

    constant:        u = 1 - (r/R)^2, g = (2/R^2)^(p-1) (n+p-2-ap) r^(p-2-ap)
    inverse_radius:  u = 1 - r/R,     g = R^(1-p) (n-1-ap) r^(-1-ap)
    trig:            u = cos(k r), k = pi/(2R), p = 2 and a = 0 only

    For n=3, p=2, a=0 the first two reduce to g = 6 and g = 2/r.
    """
    n, p, a, R = params.n, params.p, params.a, grid.R
    r = grid.nodes
    if name == 'constant':
        u = 1.0 - (r / R) ** 2
        g0 = (2.0 / R ** 2) ** (p - 1.0) * (n + p - 2.0 - a * p)
        field = radial.make_field(grid, u, dirichlet=True)
        return field, _power_source(name, field.values, g0, a * p + 2.0 - p)
    if name == 'inverse_radius':
        u = 1.0 - r / R
        g0 = R ** (1.0 - p) * (n - 1.0 - a * p)
        field = radial.make_field(grid, u, dirichlet=True)
        return field, _power_source(name, field.values, g0, 1.0 + a * p)
    if name == 'trig':
        if p != 2.0 or a != 0.0:
            raise ValueError('the trig case is manufactured for p = 2, a = 0 only')
        k = np.pi / (2.0 * R)
        field = radial.make_field(grid, np.cos(k * r), dirichlet=True)
        # sin(kr)/r without the removable singularity
        sin_over_r = k * np.sinc(k * r / np.pi)
        source = k * k * np.cos(k * r) + (n - 1.0) * k * sin_over_r
        r_dsource = -k ** 3 * r * np.sin(k * r) + (n - 1.0) * k * (k * np.cos(k * r) - sin_over_r)
        u = field.values
        return field, SourceSpec(name=name, g=source, G=source * u, xGx=r_dsource * u)
    if name == 'problem':
        raise ValueError("the 'problem' source needs a field and lambda; use problem_source")
    raise ValueError(f"unknown manufactured case '{name}', expected one of {CATALOG}")


def problem_source(params, grid, field, lam):
    """g = |x|^(-bq)|u|^(q-2)u + lambda |x|^(-(a+1)p+c)|u|^(p-2)u and its primitive"""
    q = derive_exponents(params).q
    p = params.p
    u = field.values
    bq = params.b * q
    alpha = radial.perturbation_alpha(params)
    order = max(bq, alpha, 0.0)
    r = grid.nodes
    critical = r ** (order - bq)
    perturbed = r ** (order - alpha)
    g = (critical * np.sign(u) * np.abs(u) ** (q - 1.0)
         + lam * perturbed * np.sign(u) * np.abs(u) ** (p - 1.0))
    G = critical * np.abs(u) ** q / q + lam * perturbed * np.abs(u) ** p / p
    xGx = -bq * critical * np.abs(u) ** q / q - lam * alpha * perturbed * np.abs(u) ** p / p
    return SourceSpec(name='problem', g=g, G=G, xGx=xGx, singular_order=order)


def pucci_serrin_check(params, grid, field, source):
    _check_dirichlet(grid, field)
    _check_source(grid, source)
    n = params.n
    shift = 1.0 + params.a - n / params.p
    integrand = n * source.G + source.xGx + shift * field.values * source.g
    rhs = radial.integrate_nodal(grid, integrand, n, source.singular_order, order=2)
    lhs = boundary_term(params, grid, field)
    report = _report(lhs, rhs)
    logger.debug('Pucci-Serrin %s: lhs=%.12g rhs=%.12g relative=%.2e',
                 source.name, lhs, rhs, report.relative)
    return report


def pohozaev_residual(params, grid, field, lam):
    """Boundary term against (c lambda / p) int |x|^(-(a+1)p+c)|u|^p dx"""
    _check_dirichlet(grid, field)
    p = params.p
    mass = radial.integrate_nodal(grid, np.abs(field.values) ** p, params.n,
                                  radial.perturbation_alpha(params), order=2)
    rhs = params.c * lam / p * mass
    lhs = boundary_term(params, grid, field)
    unweighted = boundary_term(params, grid, field, weighted=False) if params.a != 0.0 else None
    return _report(lhs, rhs, unweighted)


def nonexistence_certificate(params, grid, field, lam):
    """max(lhs, -rhs): both vanish only for u = 0 when lambda <= 0"""
    if lam > 0:
        raise LambdaSignError(f"got lambda={lam}")
    report = pohozaev_residual(params, grid, field, lam)
    return max(report.lhs, -report.rhs)
