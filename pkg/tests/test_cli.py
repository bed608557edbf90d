"""Tests for the command-line entry point."""

from pathlib import Path

import pytest

from cli import build_parser, config_from_args, main
from harness import read_csv, read_metadata

TINY = [
    '--env', 'mountain_car',
    '--scheme', 'bspline-coupled',
    '--order', '1',
    '--scale', '1',
    '--alpha', '0.05',
    '--episodes', '2',
    '--max-steps', '40',
    '--seeds', '0',
    '--smoothing-window', '2',
    '--selection-window', '2',
    '--log-level', 'warning',
]


@pytest.fixture
def trained_basis(tmp_path):
    """Basis file written by a tiny `run`"""
    assert main(['run', *TINY, '--output-dir', str(tmp_path)]) == 0
    return next(tmp_path.glob('*/basis_seed_0.txt'))


def test_flags_override_config_file(tmp_path):
    path = tmp_path / 'exp.env'
    path.write_text('ENV=acrobot\nALPHA=0.01\nLAMBDA=0.5\n')
    args = build_parser().parse_args(['run', '--config', str(path), '--alpha', '0.2', '--diagnostics'])
    config = config_from_args(args)
    assert config.env == 'acrobot'
    assert config.agent.alpha == 0.2
    assert config.agent.lambda_ == 0.5
    assert config.diagnostics
    assert config.agent.fourier_alpha_scaling


def test_run_writes_outputs(tmp_path, capsys):
    assert main(['run', *TINY, '--output-dir', str(tmp_path)]) == 0
    out_dir = next(p for p in tmp_path.iterdir() if p.is_dir())
    assert (out_dir / 'aggregate.csv').exists()
    assert len(read_csv(out_dir / 'episodes_seed_0.csv')) == 2
    assert 'seed 0' in capsys.readouterr().out


def test_grid_search(tmp_path, capsys):
    assert main(['grid-search', *TINY, '--alpha-grid', '0.05,0.1', '--output-dir', str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert 'Selected alpha' in out
    assert next(tmp_path.glob('*-grid-*/grid_search.csv')).exists()


def test_export_vf(tmp_path, trained_basis):
    output = tmp_path / 'vf.csv'
    code = main([
        'export-vf', *TINY, '--basis', str(trained_basis), '--value-resolution', '6', '--output', str(output)
    ])
    assert code == 0
    assert len(read_csv(output)) == 36
    assert read_metadata(output)['resolution'] == 6


def test_export_vf_default_output(trained_basis):
    assert main(['export-vf', *TINY, '--basis', str(trained_basis), '--value-resolution', '3']) == 0
    assert Path(trained_basis).with_name('basis_seed_0_value.csv').exists()


def test_eval_frozen(trained_basis, capsys):
    code = main(['eval-frozen', *TINY, '--basis', str(trained_basis), '--eval-episodes', '2', '--seeds', '1,2'])
    assert code == 0
    assert 'over 2 runs of 2 episodes' in capsys.readouterr().out


def test_eval_frozen_rejects_wrong_environment(trained_basis):
    assert main(['eval-frozen', *TINY, '--env', 'acrobot', '--basis', str(trained_basis)]) == 1


def test_invalid_config_returns_error(tmp_path):
    assert main(['run', *TINY, '--scheme', 'tile-coding', '--output-dir', str(tmp_path)]) == 1
    assert main(['run', '--config', str(tmp_path / 'missing.env')]) == 1
    assert not any(tmp_path.iterdir())


def test_missing_basis_file(tmp_path):
    assert main(['export-vf', *TINY, '--basis', str(tmp_path / 'none.txt')]) == 1


@pytest.mark.parametrize('argv', [
    [],
    ['train'],
    ['export-vf'],
    ['run', '--episodes', 'many'],
    ['run', '--log-level', 'loud'],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
