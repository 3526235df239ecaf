import math

import numpy as np
import pytest

from qes_spectra import GaugeWavefunction, NonConvergence, NotAnEigenvalue, NumericsCfg, ZetaZero, build_R, \
    build_operator, eigen_spectrum, eval_R, factorization_check, phi_from_R, qes_energies_recursion, recursion_coeffs

from util_test import assert_multiset_close, minus_m4_energies, spec


def test_coeffs_plus_m3():
    c = recursion_coeffs(spec('plus', 0.5, 3))
    assert [c.b(n) for n in range(3)] == [4.75, 8.75, 4.75]
    assert [c.a(n) for n in range(4)] == [0., -2., -2., 0.]


def test_coeffs_boundary_zeros():
    for variant in ('plus', 'minus'):
        for m in (1, 4, 9):
            c = recursion_coeffs(spec(variant, 1.7, m))
            assert c.a(0) == 0
            assert c.a(m) == 0


def test_r2_minus_m2():
    polys = build_R(spec('minus', 1., 2), 2)
    assert [p.degree for p in polys] == [0, 1, 2]
    np.testing.assert_allclose(polys[2].coeffs, [12, -8, 1])
    assert polys[2](2.) == 0 and polys[2](6.) == 0


def test_build_R_rejects_negative():
    with pytest.raises(ValueError):
        build_R(spec('plus', 1., 2), -1)


def test_eval_R_matches_expanded():
    s = spec('plus', 0.8, 5)
    poly = build_R(s, 5)[5]
    energies = np.array([0.5, 3 + 2j, 17 - 1j])
    r, bound = eval_R(s, energies)
    assert np.all(np.abs(r - poly(energies)) <= 1e-12 * bound)
    assert np.all(bound >= np.abs(r))


@pytest.mark.parametrize("variant,zeta,m,expected", [
    ('plus', 0.25, 3, [4.9375, 5.205448, 8.669552]),
    ('plus', 1., 3, [4, 6 + 3.464102j, 6 - 3.464102j]),
    ('minus', 1., 4, [6, 7.071797, 14, 20.928203]),
    ('plus', 0.5, 2, [2.75 + 1j, 2.75 - 1j]),
    ('minus', 0.3, 1, [1.09]),
])
def test_recursion_spectra(variant, zeta, m, expected):
    spectrum = qes_energies_recursion(spec(variant, zeta, m))
    assert_multiset_close(spectrum.energies, expected, atol=1e-5)


def test_recursion_minus_m4_sweep():
    for zeta in (0.1, 0.5, 2., 5.):
        spectrum = qes_energies_recursion(spec('minus', zeta, 4))
        assert_multiset_close(spectrum.energies, minus_m4_energies(zeta), atol=1e-9)
        assert spectrum.is_real


def test_recursion_zeta_zero():
    spectrum = qes_energies_recursion(spec('plus', 0., 3))
    assert_multiset_close(spectrum.energies, [5, 9, 5], atol=0)
    assert sum(abs(c) > 0 for c in spectrum.levels[0].phi_coeffs) == 1


@pytest.mark.parametrize("variant", ['plus', 'minus'])
@pytest.mark.parametrize("m", [6, 10, 15, 20])
def test_recursion_matches_matrix(variant, m):
    for zeta in (0.1, 0.5, 1., 2., 5.):
        s = spec(variant, zeta, m)
        matrix = eigen_spectrum(build_operator(s), s).energies
        scale = max(1., max(abs(e) for e in matrix))
        assert_multiset_close(qes_energies_recursion(s).energies, matrix, atol=1e-8 * scale)


def test_recursion_minus_m20_real():
    spectrum = qes_energies_recursion(spec('minus', 1., 20))
    assert spectrum.is_real
    assert max(abs(e.imag) for e in spectrum.energies) < 1e-9


def test_recursion_tiny_zeta():
    # zeta^2 underflows, so every a_n is an exact zero
    s = spec('minus', 1e-170, 6)
    assert_multiset_close(qes_energies_recursion(s).energies, [11, 27, 35, 35, 27, 11], atol=0)
    phi = phi_from_R(s, 11.)
    assert len(phi) == 6
    assert np.all(np.isfinite(phi))


def test_factorization():
    for variant in ('plus', 'minus'):
        for m in (1, 3, 6):
            assert factorization_check(spec(variant, 0.7, m), 5) < 1e-9


def test_factorization_rejects_zero_extra():
    with pytest.raises(ValueError):
        factorization_check(spec('plus', 1., 2), 0)


def test_phi_from_R_errors():
    with pytest.raises(ZetaZero):
        phi_from_R(spec('minus', 0., 2), 3.)
    with pytest.raises(NotAnEigenvalue):
        phi_from_R(spec('minus', 1., 2), 0.)
    with pytest.raises(NotAnEigenvalue):
        phi_from_R(spec('minus', 1., 2), 6.001)


def test_phi_from_R_operator_residual():
    s = spec('minus', 0.5, 3)
    energy = 7.25 + 2 * math.sqrt(2)
    phi = phi_from_R(s, energy)
    assert len(phi) == 3
    assert abs(phi[-1] - 1) < 1e-15
    assert GaugeWavefunction(s, energy, phi).operator_residual() < 1e-12


def test_aberth_nonconvergence():
    cfg = NumericsCfg(aberth_max_iter=1)
    with pytest.raises(NonConvergence):
        qes_energies_recursion(spec('minus', 1., 8), cfg)
