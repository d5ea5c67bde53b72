"""Value types shared by the lab modules, the report writer and the CLI.

Every type is immutable once built; the numeric arrays they carry are never
modified in place by library code.
"""
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class CknParams:
    """Validated problem parameters (n, p, a, b, c)"""

    n: int
    p: float
    a: float
    b: float
    c: float

    @property
    def d(self):
        return 1.0 + self.a - self.b

    @property
    def hardy_endpoint(self):
        """b = a+1: valid parameters, but no solver or bubble operation supports them"""
        return self.d == 0.0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DerivedExponents:
    """All exponents derived from CknParams.

    eta and nehari_exp are None at the Hardy endpoint d=0.
    """

    d: float
    q: float
    cstar: float
    eta: Optional[float]
    c0: Optional[float]
    nehari_exp: Optional[float]
    gap_coeff: float
    decay_rate: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ExtremalProfile:
    """Closed-form radial extremal c0*((n-p-pa)/(1+r^eta))^power"""

    params: CknParams
    amplitude: float
    eta: float
    power: float
    decay_rate: float


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Geometric radial mesh r_0=0 < r_1 < ... < r_M = R"""

    R: float
    nodes: np.ndarray
    ratio: float

    @property
    def size(self):
        return len(self.nodes)

    @property
    def widths(self):
        return np.diff(self.nodes)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Piecewise-linear radial function given by its node values"""

    grid: RadialGrid
    values: np.ndarray

    @property
    def is_dirichlet(self):
        return self.values[-1] == 0.0

    def scaled(self, t):
        return RadialField(self.grid, t * self.values)

    def to_rows(self):
        return list(zip(self.grid.nodes.tolist(), self.values.tolist()))


@dataclass(frozen=True)
class EigenPair:
    lambda1: float
    e1: RadialField
    iterations: int
    residual: float
    converged: bool = True

    def to_dict(self):
        return {
            'lambda1': self.lambda1,
            'iterations': self.iterations,
            'residual': self.residual,
        }


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """Source g(x,u) sampled along a field, with its primitive G and x.G_x.

    All three arrays are stored multiplied by r^singular_order so that they
    stay finite at the origin; integrals divide the weight accordingly.
    """

    name: str
    g: np.ndarray
    G: np.ndarray
    xGx: np.ndarray
    singular_order: float = 0.0


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    residual: float
    relative: float
    lhs_unweighted: Optional[float] = None

    def to_dict(self):
        data = {
            'lhs': self.lhs,
            'rhs': self.rhs,
            'residual': self.residual,
            'relative': self.relative,
        }
        if self.lhs_unweighted is not None:
            data['lhs_unweighted'] = self.lhs_unweighted
        return data


@dataclass(frozen=True)
class BubbleRecord:
    eps: float
    grad_p_norm: float
    grad_correction: float
    grad_alpha_norms: dict
    pert_norm: float
    qnorm_check: float
    s_reference: float = 0.0

    def to_dict(self):
        return asdict(self)

    def to_row(self):
        alphas = self.grad_alpha_norms
        return [self.eps, self.grad_p_norm, self.grad_correction,
                alphas.get('1'), alphas.get('2'), alphas.get('p-2'), alphas.get('p-1'),
                self.pert_norm, self.qnorm_check]


SWEEP_HEADER = ['eps', 'grad_p', 'grad_corr', 'alpha1', 'alpha2', 'alphapm2',
                'alphapm1', 'pert', 'qnorm']


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    log_factor_detected: bool

    def to_dict(self):
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'stderr': self.stderr,
            'r_squared': self.r_squared,
            'log_factor': self.log_factor_detected,
        }


@dataclass(frozen=True)
class AtomReport:
    eps: float
    delta: float
    nu_atom: float
    mu_atom: float
    slack: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SolveReport:
    lam: float
    field: RadialField
    quotient: float
    energy: float
    t_star: float
    threshold: float
    margin: float
    pde_residual: float
    pohozaev_relative: float
    concentration_fraction: float
    converged: bool
    status: str
    iterations: int = 0
    start: str = ''

    def to_dict(self):
        return {
            'lambda': self.lam,
            'quotient': self.quotient,
            'energy': self.energy,
            't_star': self.t_star,
            'threshold': self.threshold,
            'margin': self.margin,
            'pde_residual': self.pde_residual,
            'pohozaev_relative': self.pohozaev_relative,
            'concentration_fraction': self.concentration_fraction,
            'converged': self.converged,
            'status': self.status,
        }


@dataclass(frozen=True)
class ProbeLevel:
    nodes: int
    best_quotient: float
    concentration_fraction: float
    certificate: float
    amplitude: float
    status: str

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ProbeReport:
    lam: float
    s_radial: float
    levels: list = field(default_factory=list)

    @property
    def solution_found(self):
        return any(level.status == 'converged' and level.amplitude >= 0.01
                   for level in self.levels)

    def to_dict(self):
        return {
            'lambda': self.lam,
            's_radial': self.s_radial,
            'solution_found': self.solution_found,
            'levels': [level.to_dict() for level in self.levels],
        }


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config: dict
    version: str
    timestamp: str
    outputs: list

    def to_dict(self):
        return asdict(self)
