import click

from commands import config_options
from lab import bubble_lab
from models import SWEEP_HEADER
from reports import emit_report, field_table

# fitted on every sweep; the alpha norms are fitted when they exist for this p
REQUIRED_FITS = ('grad_correction', 'pert_norm')


@click.command('bubble')
@config_options
def bubble_cmd(doc):
    """Norm bookkeeping of the normalized bubble v_eps at eps = eps_min"""
    params = doc.params()
    grid = doc.grid()
    record = bubble_lab.bubble_report(params, grid, doc.eps_min)
    tables = {}
    if doc.format == 'csv':
        tables['bubble.csv'] = field_table(bubble_lab.make_bubble(params, grid, doc.eps_min))
    manifest = emit_report(doc.out_dir, 'bubble', doc.to_dict(), {'bubble.json': record.to_dict()},
                           tables)
    click.echo(f"eps={record.eps:g} grad_p={record.grad_p_norm:.12g} "
               f"correction={record.grad_correction:.6e} qnorm={record.qnorm_check:.12g}")
    return manifest


def _fits(records):
    fits = {name: bubble_lab.fit_rate(records, name) for name in REQUIRED_FITS}
    for name in bubble_lab.ALPHA_KEYS:
        if all(bubble_lab.record_value(record, name) is not None for record in records):
            fits[name] = bubble_lab.fit_rate(records, name)
    return fits


def _cell(value):
    return '-' if value is None else f"{value:.4f}"


@click.command('sweep')
@config_options
def sweep_cmd(doc):
    """eps sweep of bubble norms with rate fits, predicted exponents and the atom diagnostic"""
    params = doc.params()
    grid = doc.grid()
    eps_list = doc.eps_list()
    records = bubble_lab.sweep(params, grid, eps_list, workers=doc.workers)
    fits = _fits(records)
    table = bubble_lab.rate_table(params)
    columns = {}
    for name, fit in fits.items():
        predicted = table['items'].get(name, {})
        columns[name] = {
            'claimed': predicted.get('claimed'),
            'scaling_derived': predicted.get('scaling_derived'),
            'b_shifted': predicted.get('b_shifted'),
            'fitted': fit.slope,
            'log_factor': fit.log_factor_detected,
        }
    rates = {
        'rate_table': table,
        'fits': {name: fit.to_dict() for name, fit in fits.items()},
        'columns': columns,
    }
    atoms = bubble_lab.atom_check(params, grid, eps_list, doc.atom_radius())
    manifest = emit_report(
        doc.out_dir, 'sweep', doc.to_dict(),
        {'rates.json': rates, 'atoms.json': [atom.to_dict() for atom in atoms]},
        {'sweep.csv': (SWEEP_HEADER, [record.to_row() for record in records])},
    )
    click.echo(f"{'quantity':<16}{'claimed':>12}{'scaling':>12}{'fitted':>12}  log")
    for name, row in columns.items():
        click.echo(f"{name:<16}{_cell(row['claimed']):>12}{_cell(row['scaling_derived']):>12}"
                   f"{_cell(row['fitted']):>12}  {'yes' if row['log_factor'] else 'no'}")
    return manifest


bubble_cmds = [bubble_cmd, sweep_cmd]
