import io
import json
import logging

import pandas as pd
import pytest

from qes_spectra import NonConvergence

import qes_spectra_cli.logger as cli_logger
import qes_spectra_cli.main as cli_main
from qes_spectra_cli.file_utils import format_table
from qes_spectra_cli.logger import setup_logging
from qes_spectra_cli.main import main
from qes_spectra_cli.params import parse_args


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def _csv(capsys):
    return pd.read_csv(io.StringIO(capsys.readouterr().out))


def test_parse_zeta_grid():
    args = parse_args(['conjecture-scan', '--zeta-grid', '0.5, 1,2'])
    assert args.zeta_grid == (0.5, 1., 2.)
    assert args.m_max == 12
    assert args.progress


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(['spectrum', '--m', 'three']) == 1
    assert main(['conjecture-scan', '--zeta-grid', 'a,b']) == 1
    assert main(['spectrum', '--variant', 'sideways', '--zeta', '1', '--m', '2']) == 1


def test_spectrum_csv(capsys):
    assert main(['spectrum', '--variant', 'minus', '--zeta', '1', '--m', '4', '--no-progress']) == 0
    df = _csv(capsys)
    assert list(df.columns) == ['zeta', 'level_index', 're_E', 'im_E', 'reality', 'pair_id', 'method']
    assert df['re_E'].tolist() == pytest.approx([6, 7.071797, 14, 20.928203], abs=1e-5)
    assert set(df['reality']) == {'real'}


def test_spectrum_all_routes_json(capsys):
    assert main(['spectrum', '--preset', 'plus-m3', '--method', 'all', '--format', 'json']) == 0
    doc = _json(capsys)
    assert doc['meta']['m'] == 3 and doc['meta']['zeta'] == 0.25
    assert set(doc['meta']['deviations']) == {'closed-matrix', 'closed-recursion', 'matrix-recursion'}
    assert max(doc['meta']['deviations'].values()) < 1e-9
    assert len(doc['rows']) == 9


def test_spectrum_complex_pairs(capsys):
    assert main(['spectrum', '--variant', 'plus', '--zeta', '1', '--m', '3', '--format', 'json']) == 0
    rows = _json(capsys)['rows']
    assert [r['reality'] for r in rows] == ['real', 'complex', 'complex']
    assert rows[0]['pair_id'] is None
    assert rows[1]['pair_id'] == rows[2]['pair_id'] == 0


def test_spectrum_route_disagreement(capsys, monkeypatch):
    monkeypatch.setattr(cli_main, 'multiset_deviation', lambda a, b: 1.)
    assert main(['spectrum', '--variant', 'minus', '--zeta', '1', '--m', '2', '--method', 'all']) == 2


def test_spectrum_nonconvergence(capsys, monkeypatch):
    def fail(spec, method, cfg):
        raise NonConvergence('stalled')

    monkeypatch.setattr(cli_main, 'solve_spectrum', fail)
    assert main(['spectrum', '--variant', 'minus', '--zeta', '1', '--m', '2']) == 3


def test_spectrum_unsupported_closed(capsys):
    assert main(['spectrum', '--variant', 'minus', '--zeta', '1', '--m', '5', '--method', 'closed']) == 1


def test_spectrum_to_file(tmp_path):
    out = tmp_path / 'spectrum.csv'
    assert main(['spectrum', '--preset', 'minus-m2', '--out', str(out)]) == 0
    df = pd.read_csv(out)
    assert df['re_E'].tolist() == pytest.approx([2., 6.])


def test_sweep_from_preset(capsys):
    assert main(['sweep', '--preset', 'minus-m2', '--steps', '5', '--no-progress', '--format', 'json']) == 0
    doc = _json(capsys)
    assert doc['meta']['steps'] == 5 and doc['meta']['zeta_max'] == 2.
    assert len(doc['rows']) == 10
    assert all(r['max_imag'] == 0 for r in doc['rows'])


def test_sweep_missing_bounds(capsys):
    assert main(['sweep', '--variant', 'plus', '--m', '2']) == 1


@pytest.mark.parametrize("m,expected", [(2, 0.), (3, 0.5), (4, 0.)])
def test_threshold(capsys, m, expected):
    assert main(['threshold', '--m', str(m), '--format', 'json']) == 0
    row = _json(capsys)['rows'][0]
    assert row['variant'] == 'plus'
    assert abs(row['zeta_c'] - expected) < 1e-6


def test_threshold_minus(capsys):
    assert main(['threshold', '--variant', 'minus', '--m', '3', '--format', 'json']) == 0
    assert _json(capsys)['rows'][0]['zeta_c'] is None


def test_conjecture_scan(capsys):
    assert main(['conjecture-scan', '--m-max', '6', '--zeta-grid', '0.5,2', '--no-progress', '--format', 'json']) == 0
    doc = _json(capsys)
    assert doc['meta']['verdict'] == 'supports'
    assert doc['meta']['variant'] == 'minus'
    assert len(doc['rows']) == 12


def test_wavefunction(capsys):
    args = ['wavefunction', '--variant', 'minus', '--zeta', '0.5', '--m', '3', '--level', '1', '--samples', '9',
            '--format', 'json']
    assert main(args) == 0
    doc = _json(capsys)
    assert len(doc['rows']) == 9
    assert max(r['residual'] for r in doc['rows']) < 1e-8
    assert len(doc['meta']['phi_coeffs']) == 3


def test_wavefunction_fd(capsys):
    args = ['wavefunction', '--variant', 'plus', '--zeta', '0.5', '--m', '2', '--x-min', '-1', '--x-max', '1',
            '--samples', '5', '--fd']
    assert main(args) == 0
    df = _csv(capsys)
    assert df['residual'].max() < 1e-6


def test_wavefunction_bad_level(capsys):
    assert main(['wavefunction', '--variant', 'plus', '--zeta', '1', '--m', '2', '--level', '2']) == 1


def test_format_table():
    text = format_table([dict(a=1.5, b=None)], ['a', 'b'], 'csv', int_columns=('b',))
    assert text.splitlines() == ['a,b', '1.500000000000e+00,']
    doc = json.loads(format_table([dict(a=float('nan'))], ['a'], 'json', meta=dict(k=1)))
    assert doc == {'meta': {'k': 1}, 'rows': [{'a': None}]}
    with pytest.raises(ValueError):
        format_table([], ['a'], 'xml')


def test_spectrum_minus_m3_all_routes(capsys):
    args = ['spectrum', '--variant', 'minus', '--zeta', '1', '--m', '3', '--method', 'all', '--format', 'json']
    assert main(args) == 0
    doc = _json(capsys)
    matrix = [r['re_E'] for r in doc['rows'] if r['method'] == 'matrix']
    assert matrix == pytest.approx([3.527864, 6, 12.472136], abs=1e-6)
    assert max(doc['meta']['deviations'].values()) < 1e-9


def test_spectrum_zeta_zero_diagonal(capsys):
    assert main(['spectrum', '--variant', 'minus', '--zeta', '0', '--m', '5', '--format', 'json']) == 0
    assert [r['re_E'] for r in _json(capsys)['rows']] == [9, 9, 21, 21, 25]


def test_spectrum_output_deterministic(capsys):
    args = ['spectrum', '--variant', 'plus', '--zeta', '0.7', '--m', '6', '--method', 'all']
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_setup_logging_root_only():
    other = logging.getLogger('qes_spectra.test_other')
    other.setLevel(logging.WARNING)
    try:
        setup_logging(None, logging.DEBUG)
        setup_logging(None, logging.INFO)
        assert logging.root.level == logging.INFO
        assert other.level == logging.WARNING
        assert len(cli_logger._HANDLERS) == 1
    finally:
        while cli_logger._HANDLERS:
            logging.root.removeHandler(cli_logger._HANDLERS.pop())
        other.setLevel(logging.NOTSET)
