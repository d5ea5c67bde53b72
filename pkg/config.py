import os
from dataclasses import asdict, dataclass
from typing import Optional

from dotenv import load_dotenv
from werkzeug.datastructures import MultiDict

from forms import ConfigForm
from lab import radial
from lab.bubble_lab import default_eps_list
from lab.ckn_core import validate_params
from lab.errors import ConfigError, ParameterError

# Load environment variables from .env file
load_dotenv()

# Environment variable that wins over every out_dir setting
OUT_ENV = 'CKNLAB_OUT'

# default atom-capture radius, as a fraction of R
ATOM_RADIUS = 0.2

CONFIG_KEYS = ('n', 'p', 'a', 'b', 'c', 'lambda', 'R', 'nodes', 'ratio', 'eps_min', 'eps_max',
               'eps_count', 'tol', 'max_iters', 'out_dir', 'format', 'delta', 'workers')


class Config:
    """Process-wide settings read from the environment"""

    LOG_LEVEL = os.environ.get('CKNLAB_LOG_LEVEL', 'INFO').upper()
    NODES = int(os.environ.get('CKNLAB_NODES', 4096))
    WORKERS = int(os.environ.get('CKNLAB_WORKERS', 1))
    OUT_DIR = 'cknlab-out'
    VERSION = '0.1.0'

    @staticmethod
    def out_dir_override():
        """CKNLAB_OUT at call time, so a changed environment is honoured"""
        return os.environ.get(OUT_ENV) or None


@dataclass(frozen=True)
class ConfigDoc:
    """Resolved run configuration: problem, grid, sweep, solver and output keys"""

    n: int
    p: float
    a: float = 0.0
    b: float = 0.0
    c: float = 2.0
    lam: Optional[float] = None
    R: float = 1.0
    nodes: int = 4096
    ratio: Optional[float] = None
    eps_min: float = 1e-6
    eps_max: float = 1e-2
    eps_count: int = 13
    tol: float = 1e-10
    max_iters: int = 100000
    out_dir: str = Config.OUT_DIR
    format: str = 'json'
    delta: Optional[float] = None
    workers: int = 1

    def params(self):
        return validate_params(self.n, self.p, self.a, self.b, self.c)

    def grid(self):
        ratio = self.ratio if self.ratio is not None else radial.default_ratio(self.nodes)
        return radial.build_grid(self.R, self.nodes, ratio)

    def eps_list(self):
        return default_eps_list(self.eps_min, self.eps_max, self.eps_count)

    def atom_radius(self):
        return self.delta if self.delta is not None else ATOM_RADIUS * self.R

    def to_dict(self):
        data = asdict(self)
        data['lambda'] = data.pop('lam')
        return data


def parse_config_text(text):
    """key=value lines into a dict of raw strings; '#' starts a comment line"""
    raw = {}
    errors = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            errors.append(f"line {number}: expected key=value, got '{line}'")
            continue
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in CONFIG_KEYS:
            errors.append(f"line {number}: unknown key '{key}'")
            continue
        raw[key] = value
    if errors:
        raise ConfigError(errors)
    return raw


def read_config_file(path):
    try:
        with open(path, encoding='utf-8') as handle:
            return parse_config_text(handle.read())
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


def parse_config(path=None, overrides=None):
    """Defaults < file < flags < CKNLAB_OUT, validated by ConfigForm then validate_params"""
    raw = {'nodes': str(Config.NODES), 'workers': str(Config.WORKERS)}
    if path is not None:
        raw.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key '{key}'")
        if value is not None:
            raw[key] = str(value)
    env_out = Config.out_dir_override()
    if env_out:
        raw['out_dir'] = env_out
    if 'lambda' in raw:
        raw['lam'] = raw.pop('lambda')

    form = ConfigForm(formdata=MultiDict(raw))
    if not form.validate():
        messages = [f"{name}: {message}" for name, errs in sorted(form.errors.items())
                    for message in errs]
        raise ConfigError(messages)
    doc = ConfigDoc(**form.document())
    try:
        doc.params()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    return doc
