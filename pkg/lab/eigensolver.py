"""First eigenpair of -div(|x|^(-ap)|Du|^(p-2)Du) = lambda |x|^(-(a+1)p+c)|u|^(p-2)u on B_R."""
import logging

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.sparse.linalg import eigsh

from lab import radial
from lab.errors import ConvergenceError
from models import EigenPair, RadialField

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 100000
ARMIJO = 1e-4
MIN_STEP = 1e-14


class QuotientDescent:
    """Sobolev-preconditioned projected descent for a 0-homogeneous quotient.

    Subclasses provide quotient, normalize and gradient on full node arrays;
    the last node stays pinned at zero and iterates stay nonnegative.
    """

    label = 'quotient'

    def __init__(self, params, grid):
        self.params = params
        self.grid = grid
        self.preconditioner = radial.stiffness_banded(params, grid)

    def quotient(self, u):
        raise NotImplementedError

    def normalize(self, u):
        raise NotImplementedError

    def gradient(self, u):
        raise NotImplementedError

    def phi(self, u):
        return radial.energy_phi(self.params, self.grid, RadialField(self.grid, u))

    def direction(self, gradient):
        step = np.zeros_like(gradient)
        step[:-1] = -solve_banded((1, 1), self.preconditioner, gradient[:-1])
        return step

    def scaled_gradient(self, gradient):
        """-gradient / diag(K): always a descent direction for a nonzero gradient"""
        step = np.zeros_like(gradient)
        step[:-1] = -gradient[:-1] / self.preconditioner[1]
        return step

    def _search_direction(self, grad):
        direction = self.direction(grad)
        slope = float(grad @ direction)
        if slope < 0.0 and np.all(np.isfinite(direction)):
            return direction, slope
        # the banded solve lost accuracy on the graded mesh
        logger.debug('%s: preconditioned step is not a descent direction (slope %.3e)',
                     self.label, slope)
        direction = self.scaled_gradient(grad)
        return direction, float(grad @ direction)

    def descend(self, u, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
        """Returns (u, value, iterations, change, converged); the value never increases.

        A zero gradient or a line search that fails while the predicted
        decrease is below tol counts as converged; any other breakdown does not.
        """
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        u[-1] = 0.0
        u = self.normalize(u)
        value = self.quotient(u)
        change = np.inf
        first_step = 1.0 / self.params.p
        iterations = 0
        for iterations in range(1, int(max_iters) + 1):
            grad = self.gradient(u)
            if not np.all(np.isfinite(grad)):
                logger.warning('%s descent: non-finite gradient at iteration %d',
                               self.label, iterations)
                return u, value, iterations, change, False
            direction, slope = self._search_direction(grad)
            if not slope < 0.0:
                return u, value, iterations, change, not np.any(grad[:-1])
            t = first_step
            while t >= MIN_STEP:
                trial = np.maximum(u + t * direction, 0.0)
                trial[-1] = 0.0
                trial = self.normalize(trial)
                trial_value = self.quotient(trial)
                if trial_value <= value + ARMIJO * t * slope:
                    break
                t *= 0.5
            else:
                settled = -slope <= tol * max(abs(value), 1.0)
                logger.info('%s descent stalled after %d iterations (slope %.3e, converged=%s)',
                            self.label, iterations, slope, settled)
                return u, value, iterations, change, settled
            change = abs(value - trial_value) / max(abs(trial_value), 1e-300)
            u, value = trial, trial_value
            if iterations % 500 == 0:
                logger.debug('%s iteration %d: %.15g (change %.2e)',
                             self.label, iterations, value, change)
            # a small change after a shortened step is not convergence
            if change < tol and (t == first_step or -slope <= tol * max(abs(value), 1.0)):
                return u, value, iterations, change, True
        return u, value, iterations, change, False


class RayleighProblem(QuotientDescent):
    """Discrete Phi/J with J normalized to 1"""

    label = 'eigen'

    def __init__(self, params, grid):
        super().__init__(params, grid)
        self.weights = radial.node_weights(grid, params.n, radial.perturbation_alpha(params))

    def j(self, u):
        return float(self.weights @ np.abs(u) ** self.params.p)

    def quotient(self, u):
        return self.phi(u) / self.j(u)

    def normalize(self, u):
        return u / self.j(u) ** (1.0 / self.params.p)

    def gradient(self, u):
        p = self.params.p
        j = self.j(u)
        grad_phi = p * radial.flux_pairing(self.params, self.grid, u)
        grad_j = p * self.weights * np.sign(u) * np.abs(u) ** (p - 1.0)
        return (grad_phi - self.phi(u) / j * grad_j) / j


def parabola(grid):
    return 1.0 - (grid.nodes / grid.R) ** 2


def first_eigenpair(params, grid, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, strict=False):
    """Minimize Phi/J from the parabola 1-(r/R)^2.

    The returned lambda1 is the quotient of a feasible nonnegative field, so it
    bounds the discrete first eigenvalue from above. With strict=True a run
    that exhausts max_iters raises ConvergenceError carrying the best iterate.
    """
    problem = RayleighProblem(params, grid)
    u, value, iterations, change, converged = problem.descend(parabola(grid), tol, max_iters)
    pair = EigenPair(lambda1=value, e1=RadialField(grid, u), iterations=iterations,
                     residual=float(change), converged=converged)
    logger.info('lambda1=%.12g after %d iterations (change %.2e, converged=%s)',
                value, iterations, change, converged)
    if not converged and strict:
        raise ConvergenceError(f"eigen descent did not converge in {max_iters} iterations",
                               result=pair)
    return pair


def rayleigh_lambda(params, grid, field):
    """Phi(u)/J(u)"""
    j = radial.energy_j(params, grid, field)
    if j <= 0.0:
        raise ZeroDivisionError('field has J(u) = 0')
    return radial.energy_phi(params, grid, field) / j


def dense_eigenvalue(params, grid):
    """Smallest eigenvalue of the p=2 discrete pencil (K, W) by shift-invert Lanczos"""
    if params.p != 2.0:
        raise ValueError('the linear eigenvalue oracle exists only for p = 2')
    banded = radial.stiffness_banded(params, grid)
    stiffness = sparse.diags([banded[2, :-1], banded[1], banded[0, 1:]], [-1, 0, 1],
                             format='csc')
    weights = radial.node_weights(grid, params.n, radial.perturbation_alpha(params))[:-1]
    mass = sparse.diags(weights, format='csc')
    values = eigsh(stiffness, k=1, M=mass, sigma=0.0, which='LM',
                   return_eigenvectors=False)
    return float(values[0])
