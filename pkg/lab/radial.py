"""Geometric radial meshes, singular-weight cell quadrature and the radial functionals.

Every integral is sphere_area(n) * int_0^R r^(n-1-alpha) phi(r) dr with phi
interpolated between nodes and the power weight integrated exactly (first
cell in closed form, every other cell by a Gauss-Legendre rule on the smooth
weight).
"""
import logging
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from lab.ckn_core import derive_exponents, sphere_area
from lab.errors import GridError, IntegrabilityError
from models import RadialField, RadialGrid

logger = logging.getLogger(__name__)

DEFAULT_NODES = 4096
MIN_NODES = 16
# r_1 ~ 1e-12 * R at every resolution
DEFAULT_SPAN_DECADES = 12.0

_GAUSS_POINTS, _GAUSS_WEIGHTS = roots_legendre(12)
_GAUSS_POINTS = 0.5 * (_GAUSS_POINTS + 1.0)
_GAUSS_WEIGHTS = 0.5 * _GAUSS_WEIGHTS


def default_ratio(node_count):
    return 10.0 ** (DEFAULT_SPAN_DECADES / (node_count - 1))


def build_grid(R, node_count, ratio):
    """Nodes r_0 = 0 and r_i = R*ratio^(i-M) for i = 1..M, with r_M = R exactly"""
    if not R > 0:
        raise GridError(f"radius must be positive, got {R}")
    if int(node_count) != node_count or node_count < MIN_NODES:
        raise GridError(f"node count must be an integer >= {MIN_NODES}, got {node_count}")
    if not ratio > 1.0:
        raise GridError(f"ratio must exceed 1, got {ratio}")
    M = int(node_count) - 1
    exponents = np.arange(1, M + 1) - M
    nodes = np.concatenate(([0.0], R * float(ratio) ** exponents.astype(float)))
    nodes[-1] = float(R)
    if not np.all(np.diff(nodes) > 0):
        raise GridError('ratio too close to 1 for this node count; nodes are not increasing')
    return RadialGrid(R=float(R), nodes=nodes, ratio=float(ratio))


def default_grid(R=1.0, node_count=DEFAULT_NODES):
    return build_grid(R, node_count, default_ratio(node_count))


def refine_levels(R=1.0, levels=(1024, 2048, 4096)):
    return [default_grid(R, count) for count in levels]


def make_field(grid, values, dirichlet=False):
    values = np.array(values, dtype=float)
    if values.shape != grid.nodes.shape:
        raise GridError(f"field has {values.size} values for {grid.size} nodes")
    if not np.all(np.isfinite(values)):
        raise GridError('field values must be finite')
    if dirichlet:
        values[-1] = 0.0
    return RadialField(grid=grid, values=values)


def sample(grid, func, dirichlet=False):
    return make_field(grid, func(grid.nodes), dirichlet=dirichlet)


def _cell_mask(grid, upto):
    if upto is None:
        return slice(None)
    return grid.nodes[1:] <= upto * (1.0 + 1e-12)


@lru_cache(maxsize=256)
def cell_moments(grid, n, alpha, degree):
    """m[j, i] = int_{cell i} r^(n-1-alpha) t^j dr with t = (r - r_i)/h_i, j = 0..degree"""
    k = n - 1.0 - alpha
    if not k > -1.0:
        raise IntegrabilityError(
            f"weight r^{k:g} is not integrable at the origin (alpha={alpha:g}, n={n})")
    r0 = grid.nodes[:-1]
    h = grid.widths
    moments = np.empty((degree + 1, h.size))
    # first cell touches the origin: closed form
    for j in range(degree + 1):
        moments[j, 0] = h[0] ** (k + 1.0) / (k + 1.0 + j)
    r = r0[1:, None] + h[1:, None] * _GAUSS_POINTS[None, :]
    weighted = h[1:, None] * _GAUSS_WEIGHTS[None, :] * r ** k
    for j in range(degree + 1):
        moments[j, 1:] = weighted @ (_GAUSS_POINTS ** j)
    moments.setflags(write=False)
    return moments


def node_weights(grid, n, alpha, upto=None):
    """Lumped weights W_i = int r^(n-1-alpha) phi_i dr * sphere_area for the hat functions"""
    m = cell_moments(grid, n, alpha, 1)
    left, right = m[0] - m[1], m[1]
    mask = _cell_mask(grid, upto)
    if upto is not None:
        left, right = np.where(mask, left, 0.0), np.where(mask, right, 0.0)
    weights = np.zeros(grid.size)
    weights[:-1] += left
    weights[1:] += right
    return sphere_area(n) * weights


def _quadratic_weights(grid, n, alpha):
    """Per-cell weights of the three-node quadratic rule and the stencil start index"""
    m = cell_moments(grid, n, alpha, 2)
    h = grid.widths
    cells = h.size
    start = np.minimum(np.arange(cells), cells - 2)
    nodes = grid.nodes
    r0 = nodes[:-1]
    # stencil abscissae in the local coordinate of each cell
    t = np.stack([(nodes[start + j] - r0) / h for j in range(3)])
    weights = np.empty((3, cells))
    for j in range(3):
        a_, b_ = [t[i] for i in range(3) if i != j]
        denom = (t[j] - a_) * (t[j] - b_)
        # L_j(t) = (t - a)(t - b)/denom = (t^2 - (a+b)t + ab)/denom
        weights[j] = (m[2] - (a_ + b_) * m[1] + a_ * b_ * m[0]) / denom
    return weights, start


def integrate_nodal(grid, values, n, alpha, order=1, upto=None):
    """sphere_area * int r^(n-1-alpha) phi dr for nodal samples phi"""
    values = np.asarray(values, dtype=float)
    if order == 1:
        return float(node_weights(grid, n, alpha, upto) @ values)
    if order != 2:
        raise ValueError(f"order must be 1 or 2, got {order}")
    weights, start = _quadratic_weights(grid, n, alpha)
    per_cell = sum(weights[j] * values[start + j] for j in range(3))
    if upto is not None:
        per_cell = per_cell[_cell_mask(grid, upto)]
    return float(sphere_area(n) * per_cell.sum())


def weighted_integral(grid, field, alpha, s, n, order=1, upto=None):
    """int_{B_R} |x|^(-alpha) |u|^s dx"""
    return integrate_nodal(grid, np.abs(field.values) ** s, n, alpha, order, upto)


def slopes(field):
    return np.diff(field.values) / field.grid.widths


def boundary_slope(grid, field):
    """Second-order one-sided u'(R) from the last three nodes"""
    r, u = grid.nodes, field.values
    h1 = r[-1] - r[-2]
    h2 = r[-2] - r[-3]
    return float(u[-1] * (2.0 * h1 + h2) / (h1 * (h1 + h2))
                 - u[-2] * (h1 + h2) / (h1 * h2)
                 + u[-3] * h1 / (h2 * (h1 + h2)))


def gradient_power(params, grid, field, s, upto=None):
    """int |x|^(-ap)|Du|^s dx with the per-cell slope; cells where u is flat contribute 0"""
    m0 = cell_moments(grid, params.n, params.a * params.p, 0)[0]
    magnitude = np.abs(slopes(field))
    density = np.zeros_like(magnitude)
    moving = magnitude > 0.0
    density[moving] = magnitude[moving] ** s * m0[moving]
    if upto is not None:
        density = density[_cell_mask(grid, upto)]
    return float(sphere_area(params.n) * density.sum())


def energy_phi(params, grid, field, upto=None):
    """Phi(u) = int |x|^(-ap)|Du|^p dx"""
    return gradient_power(params, grid, field, params.p, upto)


def perturbation_alpha(params):
    return (params.a + 1.0) * params.p - params.c


def energy_j(params, grid, field):
    """J(u) = int |x|^(-(a+1)p+c)|u|^p dx"""
    return weighted_integral(grid, field, perturbation_alpha(params), params.p, params.n)


def q_integral(params, grid, field, upto=None):
    """int |x|^(-bq)|u|^q dx"""
    q = derive_exponents(params).q
    return weighted_integral(grid, field, params.b * q, q, params.n, upto=upto)


def energy_total(params, grid, field, lam):
    """E_lambda(u) = Phi/p - (1/q) int |x|^(-bq)|u|^q - (lambda/p) J"""
    q = derive_exponents(params).q
    p = params.p
    return (energy_phi(params, grid, field) / p
            - q_integral(params, grid, field) / q
            - lam * energy_j(params, grid, field) / p)


def rayleigh_ckn(params, grid, field):
    """E_{a,b}(u) = Phi(u) / (int |x|^(-bq)|u|^q)^(p/q)"""
    mass = q_integral(params, grid, field)
    if mass <= 0.0:
        raise ZeroDivisionError('field has zero weighted q-norm')
    q = derive_exponents(params).q
    return energy_phi(params, grid, field) / mass ** (params.p / q)


def mass_fraction(params, grid, field, radius):
    """Share of the weighted q-mass inside B_radius"""
    total = q_integral(params, grid, field)
    if total <= 0.0:
        return 0.0
    return q_integral(params, grid, field, upto=radius) / total


def flux_pairing(params, grid, values):
    """A_i = int |x|^(-ap)|u'|^(p-2) u' phi_i' dx for every node i (= dPhi/du_i / p)"""
    p = params.p
    m0 = cell_moments(grid, params.n, params.a * p, 0)[0]
    h = grid.widths
    s = np.diff(values) / h
    flux = np.sign(s) * np.abs(s) ** (p - 1.0)
    cell = sphere_area(params.n) * flux * m0 / h
    pairing = np.zeros(grid.size)
    pairing[1:] += cell
    pairing[:-1] -= cell
    return pairing


def hat_norms(params, grid):
    """(int |x|^(-ap)|phi_i'|^p dx)^(1/p) for every node i"""
    p = params.p
    m0 = cell_moments(grid, params.n, params.a * p, 0)[0]
    cell = sphere_area(params.n) * m0 / grid.widths ** p
    norms = np.zeros(grid.size)
    norms[1:] += cell
    norms[:-1] += cell
    return norms ** (1.0 / p)


def stiffness_banded(params, grid, values=None, regularization=1e-12):
    """Tridiagonal weighted stiffness on the free nodes 0..M-1 in solve_banded layout.

    Without values this is the p=2 form with weight |x|^(-ap) (the Sobolev
    preconditioner); with values it is the tangent of the p-Laplacian flux.
    """
    p = params.p
    m0 = cell_moments(grid, params.n, params.a * p, 0)[0]
    h = grid.widths
    coef = sphere_area(params.n) * m0 / h ** 2
    if values is not None and p != 2.0:
        s = np.diff(values) / h
        coef = coef * (p - 1.0) * (s * s + regularization ** 2) ** ((p - 2.0) / 2.0)
    elif values is not None:
        coef = coef * (p - 1.0)
    free = grid.size - 1
    banded = np.zeros((3, free))
    diag = coef.copy()
    diag[1:] += coef[:-1]
    banded[1] = diag
    banded[0, 1:] = -coef[:free - 1]
    banded[2, :-1] = -coef[:free - 1]
    return banded


