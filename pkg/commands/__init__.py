"""Command modules and the option set they share."""
import functools

import click

from config import parse_config

# (flag, parameter name, config key)
CONFIG_FLAGS = (
    ('--n', 'n', 'n'),
    ('--p', 'p', 'p'),
    ('--a', 'a', 'a'),
    ('--b', 'b', 'b'),
    ('--c', 'c', 'c'),
    ('--lambda', 'lam', 'lambda'),
    ('--R', 'R', 'R'),
    ('--nodes', 'nodes', 'nodes'),
    ('--ratio', 'ratio', 'ratio'),
    ('--eps-min', 'eps_min', 'eps_min'),
    ('--eps-max', 'eps_max', 'eps_max'),
    ('--eps-count', 'eps_count', 'eps_count'),
    ('--tol', 'tol', 'tol'),
    ('--max-iters', 'max_iters', 'max_iters'),
    ('--out-dir', 'out_dir', 'out_dir'),
    ('--format', 'format', 'format'),
    ('--delta', 'delta', 'delta'),
    ('--workers', 'workers', 'workers'),
)


def config_options(func):
    """Adds --config and one flag per config key; the command receives a ConfigDoc as `doc`"""

    @functools.wraps(func)
    def wrapper(config_path, **flags):
        overrides = {key: flags.pop(name) for _, name, key in CONFIG_FLAGS}
        doc = parse_config(config_path, overrides)
        return func(doc=doc, **flags)

    for flag, name, key in reversed(CONFIG_FLAGS):
        wrapper = click.option(flag, name, default=None, metavar='VALUE',
                               help=f"config key '{key}' (overrides the file)")(wrapper)
    wrapper = click.option('--config', 'config_path', default=None,
                           type=click.Path(dir_okay=False),
                           help='key=value configuration file')(wrapper)
    return wrapper
