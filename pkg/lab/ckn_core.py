"""Parameter validation, exponent algebra, closed-form extremals and S_R(a,b)."""
import logging
import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from lab.errors import (ARangeError, BRangeError, CPositivityError, IntegrabilityError,
                        ParameterError, PRangeError, UnsupportedParameterError)
from models import CknParams, DerivedExponents, ExtremalProfile

logger = logging.getLogger(__name__)

# Whole-space truncation radius and quadrature target for s_radial
R_INFINITY = 1e6
R_ORIGIN = 1e-6
S_RADIAL_RTOL = 1e-8


def sphere_area(n):
    """Surface measure of the unit (n-1)-sphere, 2*pi^(n/2)/Gamma(n/2)"""
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


def validate_params(n, p, a, b, c):
    """Validate raw inputs and return CknParams.

    The Hardy endpoint d=0 passes validation; CknParams.hardy_endpoint
    flags it and solver/bubble operations refuse it.
    """
    if isinstance(n, float) and n.is_integer():
        n = int(n)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise ParameterError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    p, a, b, c = float(p), float(a), float(b), float(c)
    if not all(math.isfinite(x) for x in (p, a, b, c)):
        raise ParameterError('p, a, b and c must be finite numbers')
    if not 1.0 < p < n:
        raise PRangeError(f"got p={p}, n={n}")
    if not a < (n - p) / p:
        raise ARangeError(f"got a={a}, (n-p)/p={(n - p) / p}")
    if not a <= b <= a + 1.0:
        raise BRangeError(f"got a={a}, b={b}")
    if not c > 0.0:
        raise CPositivityError(f"got c={c}")

    params = CknParams(n=n, p=p, a=a, b=b, c=c)
    if params.hardy_endpoint:
        logger.warning('d=0 (Hardy endpoint b=a+1): valid parameters, solver-unsupported')
    if a < 0:
        logger.info('a<0: S(a,b) may lie below S_R(a,b); radial constants only')
    return params


def require_supported(params):
    if params.d <= 0.0:
        raise UnsupportedParameterError('operation undefined at the Hardy endpoint b=a+1')


def derive_exponents(params):
    n, p, a = params.n, params.p, params.a
    d = params.d
    q = n * p / (n - d * p)
    cstar = (n - p - a * p) / (p - 1.0)
    if d > 0.0:
        eta = d * p * (n - p - p * a) / ((p - 1.0) * (n - d * p))
        c0 = (n / ((p - 1.0) ** (p - 1.0) * (n - d * p))) ** ((n - d * p) / (d * p * p))
        nehari_exp = n / (d * p)
    else:
        eta = c0 = nehari_exp = None
    return DerivedExponents(d=d, q=q, cstar=cstar, eta=eta, c0=c0,
                            nehari_exp=nehari_exp, gap_coeff=d / n, decay_rate=cstar)


def extremal_profile(params):
    require_supported(params)
    exps = derive_exponents(params)
    n, p, a, d = params.n, params.p, params.a, params.d
    power = (n - d * p) / (d * p)
    amplitude = exps.c0 * (n - p - p * a) ** power
    return ExtremalProfile(params=params, amplitude=amplitude, eta=exps.eta,
                           power=power, decay_rate=exps.decay_rate)


def extremal_value(params, r):
    """U_{a,b}(r); accepts scalars or arrays of radii >= 0"""
    prof = extremal_profile(params)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError('radius must be nonnegative')
    value = prof.amplitude * (1.0 + r ** prof.eta) ** (-prof.power)
    return float(value) if value.ndim == 0 else value


def extremal_derivative(params, r):
    prof = extremal_profile(params)
    r = np.asarray(r, dtype=float)
    eta, m = prof.eta, prof.power
    with np.errstate(divide='ignore'):
        value = -prof.amplitude * m * eta * r ** (eta - 1.0) * (1.0 + r ** eta) ** (-m - 1.0)
    return float(value) if value.ndim == 0 else value


def bubble_value(params, eps, r):
    """U_eps(r) = (eps + r^eta)^(-(n-dp)/(dp))"""
    if not eps > 0:
        raise ValueError('eps must be positive')
    prof = extremal_profile(params)
    r = np.asarray(r, dtype=float)
    value = (eps + r ** prof.eta) ** (-prof.power)
    return float(value) if value.ndim == 0 else value


def k_eps(params, eps):
    """Amplitude k(eps) = c0*(eps*(n-p-ap))^((n-dp)/(dp))"""
    if not eps > 0:
        raise ValueError('eps must be positive')
    prof = extremal_profile(params)
    exps = derive_exponents(params)
    n, p, a = params.n, params.p, params.a
    return exps.c0 * (eps * (n - p - a * p)) ** prof.power


def _log_quad(func, t_lo, t_hi):
    """Integrate func(t) over [t_lo, t_hi] in unit-width pieces; returns the cumulative sums"""
    edges = np.arange(t_lo, t_hi, 1.0).tolist() + [t_hi]
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        pieces.append(value)
    return np.cumsum(pieces), np.array(edges[1:])


def _beta_tail(s, k, eta, x0):
    """int_x0^inf x^(s-1) (1+x^eta)^(-k) dx as a regularized incomplete beta function"""
    alpha, beta = s / eta, k - s / eta
    upper = 1.0 / (1.0 + x0 ** eta)
    return special.beta(alpha, beta) * special.betainc(beta, alpha, upper) / eta


def extremal_tail(params, radius, scale=1.0):
    """int_radius^inf of the gradient and q-mass densities of U(./scale), per unit sphere area.

    Exact for every radius >= 0; radius = 0 gives the whole-space integrals.
    """
    prof = extremal_profile(params)
    q = derive_exponents(params).q
    n, p, a, b = params.n, params.p, params.a, params.b
    A, eta, m, gamma = prof.amplitude, prof.eta, prof.power, prof.decay_rate
    if n - a * p - p * (gamma + 1.0) >= 0 or n - b * q - gamma * q >= 0:
        raise IntegrabilityError('extremal tail is not integrable')
    x0 = radius / scale
    grad_tail = (scale ** (n - a * p - p) * (A * m * eta) ** p
                 * _beta_tail(n - a * p + p * (eta - 1.0), p * (m + 1.0), eta, x0))
    mass_tail = scale ** (n - b * q) * A ** q * _beta_tail(n - b * q, m * q, eta, x0)
    return grad_tail, mass_tail


def _whole_space_norms(params, scale, r_inf):
    """(Phi, q-integral) of U(./scale) on R^n, and the same pair with the quadrature
    stopped near r_inf/10 and the exact tail taken from there"""
    prof = extremal_profile(params)
    q = derive_exponents(params).q
    n, p, a, b = params.n, params.p, params.a, params.b
    A, eta, m = prof.amplitude, prof.eta, prof.power
    omega = sphere_area(n)

    def grad_integrand(t):
        r = math.exp(t)
        x = r / scale
        du = A * m * eta * x ** (eta - 1.0) * (1.0 + x ** eta) ** (-m - 1.0) / scale
        return r ** (n - a * p) * du ** p

    def mass_integrand(t):
        r = math.exp(t)
        x = r / scale
        return r ** (n - b * q) * (A * (1.0 + x ** eta) ** (-m)) ** q

    t_lo, t_hi = math.log(R_ORIGIN), math.log(r_inf)
    grad_cum, edges = _log_quad(grad_integrand, t_lo, t_hi)
    mass_cum, _ = _log_quad(mass_integrand, t_lo, t_hi)

    # analytic head on [0, R_ORIGIN]
    head_exp = n - a * p + p * (eta - 1.0)
    grad_head = (A * m * eta * scale ** (-eta)) ** p * R_ORIGIN ** head_exp / head_exp
    mass_head = A ** q * R_ORIGIN ** (n - b * q) / (n - b * q)

    # edges are unit steps in log r; snap r_inf/10 to the piece end at or above it
    t_inner = math.log(r_inf / 10.0)
    k_inner = min(int(np.searchsorted(edges, t_inner - 1e-12)), len(edges) - 2)
    inner = math.exp(float(edges[k_inner]))
    g_tail, m_tail = extremal_tail(params, r_inf, scale)
    g_tail_in, m_tail_in = extremal_tail(params, inner, scale)
    phi = omega * (grad_head + grad_cum[-1] + g_tail)
    mass = omega * (mass_head + mass_cum[-1] + m_tail)
    phi_in = omega * (grad_head + grad_cum[k_inner] + g_tail_in)
    mass_in = omega * (mass_head + mass_cum[k_inner] + m_tail_in)
    return phi, mass, phi_in, mass_in


def ckn_ratio(params, phi, mass):
    q = derive_exponents(params).q
    return phi / mass ** (params.p / q)


@lru_cache(maxsize=64)
def s_radial(params, scale=1.0, r_inf=R_INFINITY, rtol=S_RADIAL_RTOL):
    """Radial best constant S_R(a,b) = E_{a,b}(U_{a,b}(./scale)) by whole-line quadrature"""
    require_supported(params)
    phi, mass, phi_in, mass_in = _whole_space_norms(params, scale, r_inf)
    value = ckn_ratio(params, phi, mass)
    check = ckn_ratio(params, phi_in, mass_in)
    achieved = abs(value - check) / value
    if achieved > rtol:
        raise IntegrabilityError(
            f"tail estimate did not converge: achieved relative tolerance {achieved:.3e}")
    if params.a < 0:
        logger.warning('a<0: reporting the radial constant S_R, which may exceed S(a,b)')
    logger.debug('S_R%s = %.12g (tail check %.2e)', params, value, achieved)
    return value


def extremal_norms(params, eps):
    """Measured whole-space norms of y_eps = k(eps)U_eps next to S_R^{q/(q-p)}.

    y_eps is the dilation U_{a,b}(r/eps^{1/eta}), so the individual norms move
    with eps while their CKN ratio does not.
    """
    require_supported(params)
    exps = derive_exponents(params)
    scale = eps ** (1.0 / exps.eta)
    phi, mass, _, _ = _whole_space_norms(params, scale, R_INFINITY * max(scale, 1.0))
    s = s_radial(params)
    claimed = s ** (exps.q / (exps.q - params.p))
    if abs(phi - claimed) > 1e-6 * claimed:
        logger.warning('||Dy_eps||^p = %.6g differs from S_R^{q/(q-p)} = %.6g at eps=%g',
                       phi, claimed, eps)
    return {
        'eps': eps,
        'grad_p_norm': phi,
        'q_norm_power': mass,
        'claimed_identity_value': claimed,
        'ratio': ckn_ratio(params, phi, mass),
    }
