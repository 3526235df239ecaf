import cmath
import math

import pytest
import torch

from qes_spectra import DomainError, GaugeWavefunction, PtStatus, VariantMismatch, build_operator, chebyshev_samples, \
    closed_form_energies, eigen_spectrum, eval_psi, from_level, gauge_consistency, gauge_factor, ode_residual, \
    pointwise_residual, psi_pt_check

from util_test import random_coeffs, spec


def _levels(variant, zeta, m):
    s = spec(variant, zeta, m)
    return [from_level(s, level) for level in eigen_spectrum(build_operator(s), s).levels]


def test_gauge_factor_values():
    assert abs(gauge_factor(spec('plus', 2., 1), 1.) - cmath.exp(1j)) < 1e-15
    assert math.isclose(abs(gauge_factor(spec('minus', 4., 1), 1j)), math.exp(-2), rel_tol=1e-14)
    assert abs(gauge_factor(spec('minus', 0., 3), 4.) - 0.25) < 1e-15


def test_gauge_factor_zero():
    with pytest.raises(DomainError):
        gauge_factor(spec('plus', 1., 2), 0.)
    with pytest.raises(DomainError):
        gauge_factor(spec('plus', 1., 2), torch.tensor([1., 0.], dtype=torch.float64))


def test_wavefunction_validation():
    s = spec('minus', 1., 2)
    with pytest.raises(ValueError):
        GaugeWavefunction(s, 2., (1.,))
    with pytest.raises(ValueError):
        GaugeWavefunction(s, 2., (0., 0.))


def test_eval_psi_matches_gauge_product():
    s = spec('minus', 0.7, 3)
    wf = _levels('minus', 0.7, 3)[1]
    for x in (-1.2, 0., 0.4, 2.):
        z = cmath.exp(2 * x)
        phi = sum(c * z ** n for n, c in enumerate(wf.phi_coeffs))
        expected = gauge_factor(s, z) * phi
        assert abs(eval_psi(wf, x) - expected) <= 1e-12 * abs(expected)


def test_eval_psi_shapes():
    wf = _levels('plus', 0.3, 2)[0]
    grid = torch.zeros(3, 4, dtype=torch.float64)
    assert eval_psi(wf, grid).shape == (3, 4)
    assert isinstance(eval_psi(wf, 0.1), complex)


def test_eval_psi_far_field_finite():
    wf = _levels('minus', 1., 3)[0]
    xs = torch.tensor([-25., 25.], dtype=torch.float64)
    psi = eval_psi(wf, xs)
    assert bool(torch.isfinite(psi).all())
    # |psi| grows like e^{(M-1)|x|} on the real line
    assert math.isclose(math.log(abs(complex(psi[1]))), 50., rel_tol=1e-2)


def test_ode_residual_minus_m1():
    s = spec('minus', 1.5, 1)
    wf = GaugeWavefunction(s, 1 + 1.5 ** 2, (1.,))
    assert ode_residual(wf) < 1e-12


@pytest.mark.parametrize("variant", ['plus', 'minus'])
def test_ode_residual_all_levels(variant):
    for m in (2, 5, 8):
        for wf in _levels(variant, 1., m):
            assert ode_residual(wf) < 1e-8


def test_energy_shift_detected():
    for variant in ('plus', 'minus'):
        for wf in _levels(variant, 1., 3):
            assert ode_residual(wf.with_energy(wf.energy + 1e-3)) > 1e-5


def test_fd_residual():
    xs = torch.linspace(-1., 1., 9, dtype=torch.float64)
    for wf in _levels('minus', 0.5, 3):
        assert ode_residual(wf, xs, mode='fd') < 1e-6


def test_unknown_mode():
    wf = _levels('plus', 1., 1)[0]
    with pytest.raises(ValueError):
        pointwise_residual(wf, mode='spectral')


def test_pointwise_default_samples():
    wf = _levels('plus', 0.5, 2)[0]
    assert pointwise_residual(wf).shape == (33,)
    samples = chebyshev_samples()
    assert float(samples[0]) > -3 and float(samples[-1]) < 3


def test_pt_phase_minus_m2():
    wf = GaugeWavefunction(spec('minus', 0.6, 2), 3 + 2 * 0.6 + 0.36, (1., 1j))
    check = psi_pt_check(wf, torch.linspace(-2., 2., 21, dtype=torch.float64))
    assert check.status is PtStatus.UNBROKEN
    assert math.isclose(check.theta, -math.pi / 2, abs_tol=1e-10)
    assert check.deviation < 1e-12


def test_pt_unbroken_minus_levels():
    xs = torch.linspace(-2., 2., 41, dtype=torch.float64)
    for wf in _levels('minus', 1.3, 4):
        assert psi_pt_check(wf, xs).status is PtStatus.UNBROKEN


def test_pt_broken_for_complex_energy():
    s = spec('minus', 1., 2)
    wf = GaugeWavefunction(s, 6 + 0.5j, (1., 1j))
    assert psi_pt_check(wf, torch.linspace(-1., 1., 5, dtype=torch.float64)).status is PtStatus.BROKEN


def test_pt_indeterminate_and_mismatch():
    wf = _levels('minus', 1., 2)[0]
    assert psi_pt_check(wf, [0.3]).status is PtStatus.INDETERMINATE
    with pytest.raises(VariantMismatch):
        psi_pt_check(_levels('plus', 1., 2)[0], [0.1, 0.2])


@pytest.mark.parametrize("variant", ['plus', 'minus'])
def test_gauge_consistency(variant):
    for m in (1, 3, 6):
        s = spec(variant, 0.9, m)
        assert gauge_consistency(s, random_coeffs(m, seed=m)) < 1e-8


def test_closed_and_gauge_levels_agree():
    s = spec('minus', 1., 3)
    for level in closed_form_energies(s).levels:
        assert from_level(s, level).operator_residual() < 1e-12
