import click

from commands import config_options
from lab import solver
from lab.errors import ConcentrationDetected, ConfigError, ConvergenceError
from reports import emit_report, field_table


@click.command('solve')
@config_options
def solve_cmd(doc):
    """Ground state of the Brezis-Nirenberg problem at 0 < lambda < lambda1"""
    if doc.lam is None:
        raise ConfigError('solve needs a value for lambda')
    params = doc.params()
    grid = doc.grid()
    report = solver.ground_state(params, grid, doc.lam, tol=doc.tol, max_iters=doc.max_iters,
                                 workers=doc.workers)
    gap = solver.gap_scan(params, grid, doc.lam, doc.eps_list())
    document = dict(report.to_dict(), start=report.start, iterations=report.iterations)
    manifest = emit_report(
        doc.out_dir, 'solve', doc.to_dict(),
        {'solve.json': document, 'gap.json': gap},
        {'solution.csv': field_table(report.field)},
    )
    click.echo(f"status={report.status} start={report.start} quotient={report.quotient:.12g} "
               f"energy={report.energy:.12g} threshold={report.threshold:.12g}")
    if report.status == 'concentration':
        raise ConcentrationDetected(
            f"minimizer concentrates at the origin (fraction {report.concentration_fraction:.4f})",
            result=report)
    if not report.converged:
        raise ConvergenceError(f"pde residual {report.pde_residual:.3e} above tolerance",
                               result=report)
    return manifest


@click.command('probe')
@config_options
def probe_cmd(doc):
    """Numerical nonexistence probe for lambda <= 0 on three refinement levels"""
    lam = 0.0 if doc.lam is None else doc.lam
    levels = (doc.nodes // 4, doc.nodes // 2, doc.nodes)
    report = solver.nonexistence_probe(doc.params(), lam, levels=levels, R=doc.R, tol=doc.tol,
                                       max_iters=doc.max_iters, workers=doc.workers)
    manifest = emit_report(doc.out_dir, 'probe', doc.to_dict(), {'probe.json': report.to_dict()})
    for level in report.levels:
        click.echo(f"nodes={level.nodes} quotient={level.best_quotient:.10g} "
                   f"fraction={level.concentration_fraction:.4f} status={level.status}")
    click.echo(f"solution_found={report.solution_found}")
    return manifest


solving_cmds = [solve_cmd, probe_cmd]
