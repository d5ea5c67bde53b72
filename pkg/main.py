"""cknlab command line: one subcommand per laboratory experiment."""
import logging
import sys

import click

from commands.analysis import analysis_cmds
from commands.bubbles import bubble_cmds
from commands.solving import solving_cmds
from config import Config
from lab.errors import CknLabError, ConfigError

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class LabGroup(click.Group):
    """Maps laboratory errors onto exit codes: 1 validation, 2 convergence, 3 output"""

    def main(self, *args, **kwargs):
        kwargs.pop('standalone_mode', None)
        try:
            result = super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as exc:
            exc.show()
            sys.exit(1)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except click.Abort:
            click.echo('Aborted!', err=True)
            sys.exit(1)
        except CknLabError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)
        if isinstance(result, int) and result:
            sys.exit(result)
        return result


@click.group(cls=LabGroup)
@click.version_option(Config.VERSION, prog_name='cknlab')
@click.option('--log-level', default=Config.LOG_LEVEL, show_default=True,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
def cli(log_level):
    """Numerical laboratory for the weighted CKN Brezis-Nirenberg problem"""
    logging.basicConfig(level=log_level.upper(), format=LOG_FORMAT, stream=sys.stderr,
                        force=True)


for command in analysis_cmds + bubble_cmds + solving_cmds:
    cli.add_command(command)


def dispatch(subcommand, doc):
    """Run one subcommand on a resolved ConfigDoc and return its RunManifest"""
    command = cli.commands.get(subcommand)
    if command is None:
        raise ConfigError(f"unknown subcommand '{subcommand}', "
                          f"expected one of {sorted(cli.commands)}")
    return command.callback.__wrapped__(doc=doc)


if __name__ == '__main__':
    cli()
