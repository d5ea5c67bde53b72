import click

from commands import config_options
from lab import eigensolver, pohozaev, radial
from lab.ckn_core import derive_exponents, extremal_norms, s_radial
from lab.errors import ConvergenceError
from lab.solver import threshold
from reports import emit_report, field_table


@click.command('params')
@config_options
def params_cmd(doc):
    """Derived exponents q, c*, eta, c0 of the parameter set"""
    params = doc.params()
    exps = derive_exponents(params)
    document = dict(exps.to_dict(), params=params.to_dict(), hardy_endpoint=params.hardy_endpoint)
    manifest = emit_report(doc.out_dir, 'params', doc.to_dict(), {'params.json': document})
    click.echo(f"q={exps.q:.10g} d={exps.d:.10g} c*={exps.cstar:.10g}")
    return manifest


@click.command('sbest')
@config_options
def sbest_cmd(doc):
    """Radial best constant S_R(a,b) and the compactness threshold"""
    params = doc.params()
    exps = derive_exponents(params)
    value = s_radial(params)
    level = threshold(params)
    document = {
        's_radial': value,
        'threshold': level,
        'gap_coeff': exps.gap_coeff,
        'nehari_exp': exps.nehari_exp,
        'radial_class_only': params.a < 0,
        'extremal_norms': extremal_norms(params, doc.eps_max),
    }
    manifest = emit_report(doc.out_dir, 'sbest', doc.to_dict(), {'sbest.json': document})
    click.echo(f"S_R={value:.12g} threshold={level:.12g}")
    return manifest


@click.command('eigen')
@config_options
def eigen_cmd(doc):
    """First eigenpair of the weighted p-Laplacian on B_R"""
    params = doc.params()
    grid = doc.grid()
    pair = eigensolver.first_eigenpair(params, grid, tol=doc.tol, max_iters=doc.max_iters)
    document = dict(pair.to_dict(), converged=pair.converged)
    tables = {'eigenfunction.csv': field_table(pair.e1)} if doc.format == 'csv' else {}
    manifest = emit_report(doc.out_dir, 'eigen', doc.to_dict(), {'eigen.json': document}, tables)
    click.echo(f"lambda1={pair.lambda1:.12g} iterations={pair.iterations}")
    if not pair.converged:
        raise ConvergenceError(f"eigen descent did not converge in {doc.max_iters} iterations",
                               result=pair)
    return manifest


def _catalog_names(params):
    names = ['constant', 'inverse_radius']
    if params.p == 2.0 and params.a == 0.0:
        names.append('trig')
    return names


@click.command('pohozaev')
@config_options
def pohozaev_cmd(doc):
    """Pucci-Serrin checks on the manufactured catalog, and the Pohozaev balance of e1 at lambda"""
    params = doc.params()
    grid = doc.grid()
    catalog = {}
    for name in _catalog_names(params):
        field, source = pohozaev.manufactured_case(name, params, grid)
        catalog[name] = pohozaev.pucci_serrin_check(params, grid, field, source).to_dict()
        click.echo(f"{name}: relative {catalog[name]['relative']:.3e}")
    document = {'catalog': catalog}
    if doc.lam is not None:
        pair = eigensolver.first_eigenpair(params, grid, tol=doc.tol, max_iters=doc.max_iters)
        field = radial.make_field(grid, pair.e1.values, dirichlet=True)
        document['eigenfunction'] = pohozaev.pohozaev_residual(params, grid, field,
                                                               doc.lam).to_dict()
        if doc.lam <= 0:
            certificate = pohozaev.nonexistence_certificate(params, grid, field, doc.lam)
            document['nonexistence_certificate'] = certificate
            click.echo(f"certificate at lambda={doc.lam:g}: {certificate:.6g}")
    manifest = emit_report(doc.out_dir, 'pohozaev', doc.to_dict(), {'pohozaev.json': document})
    return manifest


analysis_cmds = [params_cmd, sbest_cmd, eigen_cmd, pohozaev_cmd]
