import pytest

from qes_spectra import Variant

from qes_spectra_cli.parallel import THREADS_ENV, ordered_map, threads_from_env
from qes_spectra_cli.sweep import conjecture_scan, find_threshold, run_sweep, solve_spectrum, zeta_grid
from util_test import assert_multiset_close, spec


def test_zeta_grid():
    assert zeta_grid(0., 1., 5) == (0., 0.25, 0.5, 0.75, 1.)
    with pytest.raises(ValueError):
        zeta_grid(0., 1., 1)


@pytest.mark.parametrize("method", ['closed', 'matrix', 'recursion'])
def test_solve_spectrum_routes(method):
    spectrum = solve_spectrum(spec('minus', 1., 2), method)
    assert_multiset_close(spectrum.energies, [2, 6])


def test_sweep_tracks_minus_m2():
    grid = zeta_grid(0.1, 1., 10)
    result = run_sweep(Variant.MINUS, 2, grid, progress=False)
    assert len(result.spectra) == len(result.tracks) == 10
    assert max(result.max_imag) < 1e-12
    # 3 + 2 zeta + zeta^2 and 3 - 2 zeta + zeta^2 never cross for zeta > 0
    upper = result.curve(1)
    for zeta, energy in zip(grid, upper):
        assert abs(energy - (3 + 2 * zeta + zeta ** 2)) < 1e-9


def test_sweep_threads(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, '3')
    grid = zeta_grid(0., 2., 7)
    threaded = run_sweep('plus', 3, grid, 'recursion', progress=False)
    monkeypatch.setenv(THREADS_ENV, '1')
    serial = run_sweep('plus', 3, grid, 'recursion', progress=False)
    assert [s.energies for s in threaded.spectra] == [s.energies for s in serial.spectra]


def test_threads_from_env(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert threads_from_env() == 1
    monkeypatch.setenv(THREADS_ENV, 'many')
    assert threads_from_env(2) == 2
    monkeypatch.setenv(THREADS_ENV, '0')
    assert threads_from_env() == 1
    assert ordered_map(lambda x: x * 2, [1, 2, 3], progress=False) == [2, 4, 6]


def test_threshold_plus_m3():
    result = find_threshold(Variant.PLUS, 3)
    assert abs(result.zeta_c - 0.5) < 1e-6
    assert result.bracket_width <= 1e-9


@pytest.mark.parametrize("m", [2, 4])
def test_threshold_immediately_complex(m):
    result = find_threshold(Variant.PLUS, m)
    assert result.zeta_c == 0.
    assert result.note


def test_threshold_minus_and_real_interval():
    assert find_threshold(Variant.MINUS, 3).zeta_c is None
    # plus M = 1 stays real for every zeta
    result = find_threshold(Variant.PLUS, 1, zeta_hi=2.)
    assert result.zeta_c is None
    assert 'real' in result.note


def test_conjecture_scan_minus():
    report = conjecture_scan(6, (0.5, 2.), Variant.MINUS, progress=False)
    assert report.verdict == 'supports'
    assert len(report.rows) == 12
    assert report.max_certificate_dev < 1e-9
    assert all(r.closed_form_dev is not None for r in report.rows if r.m <= 4)
    assert all(r.closed_form_dev is None for r in report.rows if r.m > 4)


def test_conjecture_scan_plus_violates():
    report = conjecture_scan(3, (1.,), Variant.PLUS, progress=False)
    assert report.verdict == 'violates'
    assert report.max_certificate_dev is None
    assert [r.n_complex for r in report.rows] == [0, 2, 2]


def test_conjecture_scan_rejects_bad_m():
    with pytest.raises(ValueError):
        conjecture_scan(0, (1.,))


def test_sweep_plus_m3_reality_window():
    grid = zeta_grid(0., 1., 101)
    result = run_sweep(Variant.PLUS, 3, grid, progress=False)
    for zeta, max_imag in zip(result.zeta_grid, result.max_imag):
        if zeta <= 0.5:
            assert max_imag < 1e-9
        else:
            assert max_imag > 1e-9
    # tracked curves move continuously away from the collision
    for k in range(3):
        steps = abs(result.curve(k)[1:] - result.curve(k)[:-1])
        assert steps.max() < 0.5


def test_sweep_minus_m4_real():
    result = run_sweep(Variant.MINUS, 4, zeta_grid(0., 5., 51), progress=False)
    assert max(result.max_imag) < 1e-9
