"""Ground states of the critical problem with the lambda-perturbation, and the lambda <= 0 probe.

The ground state minimizes Q_lambda = (Phi - lambda J) / (int |x|^(-bq)|u|^q)^(p/q)
over nonnegative Dirichlet fields and is then scaled onto the Nehari manifold.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.linalg import solve_banded

from lab import bubble_lab, eigensolver, pohozaev, radial
from lab.ckn_core import derive_exponents, require_supported, s_radial, validate_params
from lab.errors import GridError, LambdaSignError, NonpositiveQuotientError, ParameterError
from models import ProbeLevel, ProbeReport, RadialField, SolveReport

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-6
NEWTON_TOL = 1e-11
NEWTON_MAX_STEPS = 40
NEWTON_GROWTH = 4.0
CONCENTRATION_RADIUS = 0.05
CONCENTRATION_MASS = 0.99
CONCENTRATION_GAP = 0.01
PROBE_LEVELS = (1024, 2048, 4096)
START_ORDER = ('bubble', 'eigenfunction', 'parabola')


def _power(values, s):
    """|x|^s with 0 wherever x = 0"""
    magnitude = np.abs(values)
    out = np.zeros_like(magnitude)
    nonzero = magnitude > 0.0
    out[nonzero] = magnitude[nonzero] ** s
    return out


class NehariProblem(eigensolver.QuotientDescent):
    """Q_lambda with the weighted q-integral normalized to 1"""

    label = 'ground state'

    def __init__(self, params, grid, lam):
        super().__init__(params, grid)
        self.lam = lam
        self.q = derive_exponents(params).q
        self.q_weights = radial.node_weights(grid, params.n, params.b * self.q)
        self.j_weights = radial.node_weights(grid, params.n, radial.perturbation_alpha(params))

    def mass(self, u):
        return float(self.q_weights @ np.abs(u) ** self.q)

    def numerator(self, u):
        return self.phi(u) - self.lam * float(self.j_weights @ np.abs(u) ** self.params.p)

    def quotient(self, u):
        return self.numerator(u) / self.mass(u) ** (self.params.p / self.q)

    def normalize(self, u):
        return u / self.mass(u) ** (1.0 / self.q)

    def gradient(self, u):
        p, q = self.params.p, self.q
        mass = self.mass(u)
        top = self.numerator(u)
        grad_top = p * (radial.flux_pairing(self.params, self.grid, u)
                        - self.lam * self.j_weights * np.sign(u) * np.abs(u) ** (p - 1.0))
        grad_mass = q * self.q_weights * np.sign(u) * np.abs(u) ** (q - 1.0)
        scale = mass ** (p / q)
        return grad_top / scale - (p / q) * top / (scale * mass) * grad_mass

    def residual_vector(self, u):
        """A_i - W^b_i |u_i|^(q-2)u_i - lambda W^c_i |u_i|^(p-2)u_i on every node"""
        p, q = self.params.p, self.q
        return (radial.flux_pairing(self.params, self.grid, u)
                - self.q_weights * np.sign(u) * np.abs(u) ** (q - 1.0)
                - self.lam * self.j_weights * np.sign(u) * np.abs(u) ** (p - 1.0))

    def jacobian_banded(self, u):
        p, q = self.params.p, self.q
        banded = radial.stiffness_banded(self.params, self.grid, values=u)
        free = u[:-1]
        banded[1] -= ((q - 1.0) * self.q_weights[:-1] * _power(free, q - 2.0)
                      + self.lam * (p - 1.0) * self.j_weights[:-1] * _power(free, p - 2.0))
        return banded


def nehari_quotient(params, grid, field, lam):
    mass = radial.q_integral(params, grid, field)
    if mass <= 0.0:
        raise ZeroDivisionError('field has zero weighted q-norm')
    q = derive_exponents(params).q
    top = radial.energy_phi(params, grid, field) - lam * radial.energy_j(params, grid, field)
    return top / mass ** (params.p / q)


def peak_scaling(params, grid, field, lam):
    """(t_star, max_t E_lambda(t v)) for v = field / ||field||_q"""
    q = derive_exponents(params).q
    mass = radial.q_integral(params, grid, field)
    if mass <= 0.0:
        raise ZeroDivisionError('field has zero weighted q-norm')
    v = field.scaled(mass ** (-1.0 / q))
    top = radial.energy_phi(params, grid, v) - lam * radial.energy_j(params, grid, v)
    if not top > 0.0:
        raise NonpositiveQuotientError(
            f"nonpositive quotient direction: Phi - lambda J = {top:.6g} at lambda={lam}")
    t_star = top ** (1.0 / (q - params.p))
    peak = (1.0 / params.p - 1.0 / q) * top ** (q / (q - params.p))
    return t_star, peak


def threshold(params):
    """(d/n) S_R^(n/(dp))"""
    require_supported(params)
    exps = derive_exponents(params)
    return exps.gap_coeff * s_radial(params) ** exps.nehari_exp


def pde_residual(params, grid, field, lam):
    """Largest hat-function residual of the weak form relative to the flux scale"""
    u = field.values
    if not np.any(u):
        return 0.0
    problem = NehariProblem(params, grid, lam)
    norms = radial.hat_norms(params, grid)[:-1]
    flux = radial.flux_pairing(params, grid, u)[:-1] / norms
    scale = float(np.max(np.abs(flux)))
    if scale == 0.0:
        scale = 1.0
    residual = problem.residual_vector(u)[:-1] / norms
    return float(np.max(np.abs(residual)) / scale)


def _newton_polish(problem, u):
    """Damped Newton on the nodal weak form, started from a Nehari-scaled field.

    Iterates stay nonnegative and within NEWTON_GROWTH of the starting
    amplitude; returns the start unchanged when no step helps.
    """
    params, grid = problem.params, problem.grid

    def size(values):
        return pde_residual(params, grid, RadialField(grid, values), problem.lam)

    ceiling = NEWTON_GROWTH * float(np.max(np.abs(u)))
    best, best_size = u.copy(), size(u)
    current, current_size = best.copy(), best_size
    for step in range(NEWTON_MAX_STEPS):
        if current_size < NEWTON_TOL:
            break
        rhs = problem.residual_vector(current)[:-1]
        try:
            delta = solve_banded((1, 1), problem.jacobian_banded(current), rhs)
        except (np.linalg.LinAlgError, ValueError):
            logger.info('Newton polish: singular Jacobian at step %d', step)
            break
        if not np.all(np.isfinite(delta)):
            logger.info('Newton polish: non-finite step at step %d', step)
            break
        t = 1.0
        while t > 1e-4:
            trial = current.copy()
            trial[:-1] -= t * delta
            trial = np.maximum(trial, 0.0)
            if np.max(trial) <= ceiling:
                trial_size = size(trial)
                if trial_size < current_size:
                    break
            t *= 0.5
        else:
            break
        current, current_size = trial, trial_size
        if current_size < best_size:
            best, best_size = current.copy(), current_size
    logger.debug('Newton polish residual %.3e -> %.3e', size(u), best_size)
    return best


def _nehari_scale(params, grid, values, lam):
    """t_star v with v the unit-q-norm direction of values"""
    field = RadialField(grid, values)
    t_star, _ = peak_scaling(params, grid, field, lam)
    q = derive_exponents(params).q
    v = values / radial.q_integral(params, grid, field) ** (1.0 / q)
    return t_star, RadialField(grid, t_star * v)


def _best_bubble(params, grid, lam, eps_list=None):
    """Bubble with the lowest Q_lambda over the sweep, or None when no eps is resolved"""
    rows = gap_scan(params, grid, lam, eps_list)
    usable = [row for row in rows if row['quotient'] is not None]
    if not usable:
        return None
    best = min(usable, key=lambda row: row['quotient'])
    return bubble_lab.make_bubble(params, grid, best['eps'])


def _starts(params, grid, lam, eigen_pair=None):
    starts = {}
    bubble = _best_bubble(params, grid, lam)
    if bubble is not None:
        starts['bubble'] = bubble.values
    if eigen_pair is None:
        eigen_pair = eigensolver.first_eigenpair(params, grid)
    starts['eigenfunction'] = eigen_pair.e1.values
    starts['parabola'] = eigensolver.parabola(grid)
    return [(name, starts[name]) for name in START_ORDER if name in starts]


def _minimize(params, grid, lam, tol, max_iters, workers=1, eigen_pair=None):
    """Multi-start descent; the lowest quotient wins, ties go to the earlier start"""
    problem = NehariProblem(params, grid, lam)
    starts = _starts(params, grid, lam, eigen_pair)

    def run(start):
        name, values = start
        return (name,) + problem.descend(values, tol, max_iters)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(start) for start in starts]
    for name, _, value, iterations, _, converged in results:
        logger.info('start %s: quotient %.12g after %d iterations (converged=%s)',
                    name, value, iterations, converged)
    best = min(range(len(results)), key=lambda i: (results[i][2], i))
    return problem, results[best]


def _is_concentrated(params, grid, field, quotient, s_value):
    fraction = radial.mass_fraction(params, grid, field, CONCENTRATION_RADIUS * grid.R)
    near = abs(quotient - s_value) <= CONCENTRATION_GAP * s_value
    return fraction, near and fraction > CONCENTRATION_MASS


def _solve(params, grid, lam, tol, max_iters, workers=1, eigen_pair=None):
    problem, (start, u, quotient, iterations, _, _) = _minimize(
        params, grid, lam, tol, max_iters, workers, eigen_pair)
    s_value = s_radial(params)
    fraction, concentrated = _is_concentrated(params, grid, RadialField(grid, u), quotient, s_value)
    if concentrated:
        status = 'concentration'
    else:
        # the descent returns a unit q-mass direction; Newton needs the solution scale
        _, scaled = _nehari_scale(params, grid, u, lam)
        u = _newton_polish(problem, scaled.values)
        quotient = problem.quotient(u)
    t_star, field = _nehari_scale(params, grid, u, lam)
    residual = pde_residual(params, grid, field, lam)
    if not concentrated:
        status = 'converged' if residual < RESIDUAL_TOL else 'maxiter'
        fraction = radial.mass_fraction(params, grid, field, CONCENTRATION_RADIUS * grid.R)
    return {
        'start': start, 'field': field, 'quotient': quotient, 't_star': t_star,
        'iterations': iterations, 'residual': residual, 'fraction': fraction, 'status': status,
    }


def ground_state(params, grid, lam, tol=eigensolver.DEFAULT_TOL,
                 max_iters=eigensolver.DEFAULT_MAX_ITERS, workers=1):
    require_supported(params)
    if not lam > 0:
        raise ParameterError(f"ground states need lambda > 0, got {lam}; see nonexistence_probe")
    pair = eigensolver.first_eigenpair(params, grid, tol=tol, max_iters=max_iters)
    if lam >= pair.lambda1:
        raise NonpositiveQuotientError(
            f"nonpositive quotient direction: lambda={lam} >= lambda1={pair.lambda1:.10g}")
    outcome = _solve(params, grid, lam, tol, max_iters, workers, eigen_pair=pair)
    field = outcome['field']
    energy = radial.energy_total(params, grid, field, lam)
    level = threshold(params)
    report = SolveReport(
        lam=lam,
        field=field,
        quotient=outcome['quotient'],
        energy=energy,
        t_star=outcome['t_star'],
        threshold=level,
        margin=level - energy,
        pde_residual=outcome['residual'],
        pohozaev_relative=pohozaev.pohozaev_residual(params, grid, field, lam).relative,
        concentration_fraction=outcome['fraction'],
        converged=outcome['status'] == 'converged',
        status=outcome['status'],
        iterations=outcome['iterations'],
        start=outcome['start'],
    )
    logger.info('ground state at lambda=%g: status %s, quotient %.12g, margin %.6g',
                lam, report.status, report.quotient, report.margin)
    return report


def gap_scan(params, grid, lam, eps_list=None):
    """Peak energy along the ray through every resolved bubble of the sweep"""
    require_supported(params)
    if eps_list is None:
        eps_list = bubble_lab.default_eps_list()
    level = threshold(params)
    rows = []
    for eps in eps_list:
        row = {'eps': float(eps), 'quotient': None, 't_star': None,
               'peak_energy': None, 'relative_gap': None}
        try:
            v = bubble_lab.make_bubble(params, grid, eps)
            t_star, peak = peak_scaling(params, grid, v, lam)
        except GridError as exc:
            logger.debug('gap scan skips eps=%g: %s', eps, exc)
        except NonpositiveQuotientError as exc:
            logger.info('gap scan: %s', exc)
        else:
            row.update(quotient=nehari_quotient(params, grid, v, lam), t_star=t_star,
                       peak_energy=peak, relative_gap=(level - peak) / level)
        rows.append(row)
    return rows


def lambda_scan(params, grid, lambdas, tol=eigensolver.DEFAULT_TOL,
                max_iters=eigensolver.DEFAULT_MAX_ITERS, workers=1):
    """Ground states on a lambda grid, in input order"""
    lambdas = [float(lam) for lam in lambdas]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda lam: ground_state(params, grid, lam, tol, max_iters),
                                 lambdas))
    return [ground_state(params, grid, lam, tol, max_iters) for lam in lambdas]


def threshold_path(params, b_values):
    """(b, threshold) along a path in b with the other parameters fixed"""
    path = []
    for b in b_values:
        point = validate_params(params.n, params.p, params.a, b, params.c)
        path.append((float(b), threshold(point)))
    for (b0, t0), (b1, t1) in zip(path, path[1:]):
        if abs(t1 - t0) > 0.01 * abs(t0):
            logger.warning('threshold jumps by %.2f%% between b=%g and b=%g',
                           100.0 * abs(t1 - t0) / abs(t0), b0, b1)
    return path


def nonexistence_probe(params, lam, levels=PROBE_LEVELS, R=1.0, tol=eigensolver.DEFAULT_TOL,
                       max_iters=eigensolver.DEFAULT_MAX_ITERS, workers=1):
    """Run the ground-state minimization for lambda <= 0 on a refinement ladder"""
    require_supported(params)
    if lam > 0:
        raise LambdaSignError(f"got lambda={lam}")
    report = ProbeReport(lam=lam, s_radial=s_radial(params))
    for grid in radial.refine_levels(R, levels):
        outcome = _solve(params, grid, lam, tol, max_iters, workers)
        field = outcome['field']
        amplitude = float(np.max(np.abs(field.values)))
        certificate = pohozaev.nonexistence_certificate(params, grid, field, lam)
        report.levels.append(ProbeLevel(
            nodes=grid.size,
            best_quotient=outcome['quotient'],
            concentration_fraction=outcome['fraction'],
            certificate=certificate,
            amplitude=amplitude,
            status=outcome['status'],
        ))
        logger.info('probe level %d: quotient %.10g, fraction %.4f, certificate %.4g, status %s',
                    grid.size, outcome['quotient'], outcome['fraction'], certificate,
                    outcome['status'])
    return report
