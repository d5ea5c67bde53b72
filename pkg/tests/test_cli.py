import csv
import json

import pytest
from click.testing import CliRunner

import config
import reports
from config import parse_config
from lab.errors import ConfigError
from main import cli, dispatch

SOBOLEV = ['--n', '3', '--p', '2', '--nodes', '256']


@pytest.fixture
def runner(monkeypatch):
    monkeypatch.delenv(config.OUT_ENV, raising=False)
    return CliRunner()


def load(directory, name):
    with open(directory / name, encoding='utf-8') as handle:
        return json.load(handle)


def test_params_writes_document_and_manifest(runner, tmp_path):
    result = runner.invoke(cli, ['params'] + SOBOLEV + ['--out-dir', str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert load(tmp_path, 'params.json')['q'] == 6
    manifest = load(tmp_path, 'manifest.json')
    assert manifest['subcommand'] == 'params'
    assert manifest['outputs'] == ['params.json']
    assert manifest['config']['n'] == 3
    assert 'lambda' in manifest['config']


def test_config_file_and_flags(runner, tmp_path):
    cfg = tmp_path / 'run.cfg'
    cfg.write_text('n = 3\np = 2\nc = 1\nnodes = 256\n')
    result = runner.invoke(cli, ['sbest', '--config', str(cfg), '--c', '2',
                                 '--out-dir', str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert load(tmp_path, 'manifest.json')['config']['c'] == 2.0
    assert load(tmp_path, 'sbest.json')['threshold'] == pytest.approx(4.2737, rel=5e-3)


def test_validation_failure_exits_1(runner, tmp_path):
    result = runner.invoke(cli, ['params', '--n', '3', '--p', '4', '--out-dir', str(tmp_path)])
    assert result.exit_code == 1
    assert '1 < p < n' in result.output
    assert not (tmp_path / 'manifest.json').exists()


def test_unknown_flag_exits_1(runner):
    result = runner.invoke(cli, ['params', '--speed', '9'])
    assert result.exit_code == 1


def test_sweep_with_too_few_eps_values_exits_1(runner, tmp_path):
    result = runner.invoke(cli, ['sweep'] + SOBOLEV + ['--eps-count', '3',
                                                        '--out-dir', str(tmp_path)])
    assert result.exit_code == 1
    assert 'at least 5' in result.output


def test_unwritable_out_dir_exits_3(runner, tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('not a directory')
    result = runner.invoke(cli, ['params'] + SOBOLEV + ['--out-dir', str(blocker / 'out')])
    assert result.exit_code == 3


def test_environment_redirects_outputs(runner, tmp_path, monkeypatch):
    target = tmp_path / 'env-out'
    monkeypatch.setenv(config.OUT_ENV, str(target))
    result = runner.invoke(cli, ['params'] + SOBOLEV + ['--out-dir', str(tmp_path / 'flag')])
    assert result.exit_code == 0, result.output
    assert (target / 'params.json').exists()
    assert not (tmp_path / 'flag').exists()


def test_eigen_csv_output(runner, tmp_path):
    result = runner.invoke(cli, ['eigen'] + SOBOLEV + ['--format', 'csv',
                                                        '--out-dir', str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert load(tmp_path, 'eigen.json')['lambda1'] == pytest.approx(9.8696, rel=2e-2)
    with open(tmp_path / 'eigenfunction.csv', encoding='utf-8') as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ['r', 'u']
    assert len(rows) == 257
    assert float(rows[-1][1]) == 0.0


def test_pohozaev_certificate(runner, tmp_path):
    result = runner.invoke(cli, ['pohozaev'] + SOBOLEV + ['--lambda=-1',
                                                           '--out-dir', str(tmp_path)])
    assert result.exit_code == 0, result.output
    document = load(tmp_path, 'pohozaev.json')
    assert set(document['catalog']) == {'constant', 'inverse_radius', 'trig'}
    assert document['nonexistence_certificate'] > 0


def test_bubble_document(runner, tmp_path):
    result = runner.invoke(cli, ['bubble'] + SOBOLEV + ['--eps-min', '1e-4',
                                                         '--out-dir', str(tmp_path)])
    assert result.exit_code == 0, result.output
    record = load(tmp_path, 'bubble.json')
    assert record['eps'] == 1e-4
    assert record['qnorm_check'] == pytest.approx(1.0)


def test_solve_needs_lambda(runner, tmp_path):
    result = runner.invoke(cli, ['solve'] + SOBOLEV + ['--out-dir', str(tmp_path)])
    assert result.exit_code == 1
    assert 'lambda' in result.output


def test_solve_above_lambda1_exits_2(runner, tmp_path):
    result = runner.invoke(cli, ['solve'] + SOBOLEV + ['--lambda', '50',
                                                        '--out-dir', str(tmp_path)])
    assert result.exit_code == 2
    assert 'nonpositive' in result.output


def test_nonexistence_command_refuses_positive_lambda(runner, tmp_path):
    result = runner.invoke(cli, ['probe'] + SOBOLEV + ['--lambda', '1',
                                                        '--out-dir', str(tmp_path)])
    assert result.exit_code == 1


def test_version(runner):
    result = runner.invoke(cli, ['--version'])
    assert result.exit_code == 0
    assert config.Config.VERSION in result.output


@pytest.mark.slow
def test_solve_writes_solution(runner, tmp_path):
    result = runner.invoke(cli, ['solve', '--n', '5', '--p', '2', '--nodes', '1024',
                                 '--lambda', '10', '--out-dir', str(tmp_path)])
    assert result.exit_code == 0, result.output
    document = load(tmp_path, 'solve.json')
    assert document['status'] == 'converged'
    assert document['margin'] > 0
    assert (tmp_path / 'solution.csv').exists()
    assert len(load(tmp_path, 'gap.json')) == 13


def test_dispatch_returns_manifest(runner, tmp_path):
    doc = parse_config(overrides={'n': '3', 'p': '2', 'nodes': '256', 'out_dir': str(tmp_path)})
    manifest = dispatch('sbest', doc)
    assert manifest.subcommand == 'sbest'
    assert manifest.outputs == ['sbest.json']
    assert (tmp_path / 'manifest.json').exists()
    with pytest.raises(ConfigError, match='unknown subcommand'):
        dispatch('plot', doc)


def test_identical_runs_give_identical_documents(runner, tmp_path):
    for name in ('first', 'second'):
        result = runner.invoke(cli, ['params'] + SOBOLEV + ['--out-dir', str(tmp_path / name)])
        assert result.exit_code == 0, result.output
    assert ((tmp_path / 'first' / 'params.json').read_bytes()
            == (tmp_path / 'second' / 'params.json').read_bytes())


def test_table_values_keep_every_digit():
    assert reports._number(1.0 / 3.0) == '0.33333333333333331'
    assert float(reports._number(0.1 + 0.2)) == 0.1 + 0.2
    assert reports._number(None) == ''
    assert reports._number(7) == '7'


def test_failed_table_leaves_nothing_behind(tmp_path):
    def rows():
        yield (0.0, 1.0)
        raise RuntimeError('solver died mid-table')

    with pytest.raises(RuntimeError):
        reports.emit_report(str(tmp_path), 'eigen', {},
                            tables={'eigenfunction.csv': (['r', 'u'], rows())})
    assert list(tmp_path.iterdir()) == []
