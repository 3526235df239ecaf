""" The cross-validation suite behind the `verify` command.

Every check returns a CheckResult with the worst value seen over its grid and the tolerance it was
held to. The suite never raises on a failed check; numerical failures inside a check are recorded as
a failed row.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
import torch

from qes_spectra import NumericsCfg, PotentialSpec, RecursionCoeffs, Transform, Variant, boundary_leak, \
    build_from_sl2, build_operator, char_poly_deviation, check_symmetry, closed_form_energies, eigen_spectrum, \
    eval_potential, eval_potential_joint, factorization_check, from_level, gauge_consistency, m4_factors, \
    m4_quartic, m4_quartic_residual, m4_quartic_scale, multiset_deviation, ode_residual, operator_deviation, \
    qes_energies_recursion, sl2_generators
from qes_spectra.constants import CLOSED_FORM_ZETA_GRID, RESIDUAL_ZETA_GRID, SCAN_ZETA_GRID
from qes_spectra.errors import QesError

from .sweep import conjecture_scan

CoeffsFactory = Callable[[PotentialSpec], RecursionCoeffs]

VARIANTS = (Variant.PLUS, Variant.MINUS)
SYMMETRY_ZETAS = (0.7, 1., 1.3)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    cases: int
    detail: str = ''


def _specs(m_max: int, zetas, m_min: int = 1):
    for variant in VARIANTS:
        for m in range(m_min, m_max + 1):
            for zeta in zetas:
                yield PotentialSpec(variant=variant, zeta=zeta, m=m)


def _result(name: str, values: List[float], tol: float, detail: str = '', upper: bool = True) -> CheckResult:
    worst = max(values) if upper else min(values)
    passed = worst <= tol if upper else worst > tol
    if not math.isfinite(worst):
        passed = False
    return CheckResult(name=name, passed=passed, worst=float(worst), tol=tol, cases=len(values), detail=detail)


def check_char_poly(cfg: NumericsCfg, coeffs_factory: Optional[CoeffsFactory] = None) -> CheckResult:
    values = []
    for spec in _specs(20, SCAN_ZETA_GRID):
        coeffs = coeffs_factory(spec) if coeffs_factory is not None else None
        values.append(char_poly_deviation(spec, coeffs=coeffs))
    return _result('char_poly', values, 1e-10, 'det(E - A) against R_M, relative coefficient deviation')


def check_boundary_leak(cfg: NumericsCfg) -> CheckResult:
    values = [abs(boundary_leak(spec)) for spec in _specs(50, SCAN_ZETA_GRID)]
    return _result('boundary_leak', values, 0., 'z^M coefficient of H_g z^(M-1)')


def check_sl2_identity(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(50, SCAN_ZETA_GRID):
        op = build_operator(spec)
        scale = max(1., float(op.to_dense().abs().max()))
        values.append(operator_deviation(op, build_from_sl2(spec)) / scale)
    return _result('sl2_identity', values, 1e-13, 'banded operator against its sl(2) assembly')


def check_sl2_algebra(cfg: NumericsCfg) -> CheckResult:
    values = []
    for m in range(1, 51):
        g = sl2_generators(m)
        eye = torch.eye(m, dtype=torch.complex128)
        casimir = float((g.casimir() - g.j * (g.j + 1) * eye).abs().max()) / (1. + g.j * (g.j + 1))
        values.append(max(g.commutator_deviation(), casimir))
    return _result('sl2_algebra', values, 1e-13, '[J0, J+-] = +-J+-, [J+, J-] = -2 J0, Casimir j(j+1)')


def check_factorization(cfg: NumericsCfg) -> CheckResult:
    values = [factorization_check(spec, 5) for spec in _specs(10, (0.1, 0.5, 1., 2.))]
    return _result('factorization', values, 1e-9, 'R_(M+n) - R_M Rbar_n for n <= 5')


def check_closed_forms(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(4, CLOSED_FORM_ZETA_GRID):
        closed = closed_form_energies(spec, cfg).energies
        values.append(multiset_deviation(closed, qes_energies_recursion(spec, cfg).energies))
        values.append(multiset_deviation(closed, eigen_spectrum(build_operator(spec), spec, cfg).energies))
    return _result('closed_forms', values, 1e-9, 'closed forms against recursion and matrix routes, M <= 4')


def check_route_equivalence(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(20, SCAN_ZETA_GRID):
        matrix = eigen_spectrum(build_operator(spec), spec, cfg).energies
        recursion = qes_energies_recursion(spec, cfg).energies
        scale = max(1., max(abs(e) for e in matrix))
        values.append(multiset_deviation(matrix, recursion) / scale)
    return _result('route_equivalence', values, 1e-8, 'recursion roots against matrix eigenvalues, M <= 20')


def _all_route_levels(spec: PotentialSpec, cfg: NumericsCfg):
    spectra = [eigen_spectrum(build_operator(spec), spec, cfg), qes_energies_recursion(spec, cfg)]
    if spec.m <= 4:
        spectra.append(closed_form_energies(spec, cfg))
    for spectrum in spectra:
        for level in spectrum.levels:
            yield from_level(spec, level)


def check_ode_residuals(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(10, RESIDUAL_ZETA_GRID):
        values.extend(ode_residual(wf) for wf in _all_route_levels(spec, cfg))
    return _result('ode_residual', values, 1e-8, 'every level of every route, M <= 10, 33 points on [-3, 3]')


def check_sensitivity(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(4, (1.,)):
        for level in eigen_spectrum(build_operator(spec), spec, cfg).levels:
            wf = from_level(spec, level)
            values.append(ode_residual(wf.with_energy(wf.energy + 1e-3)))
    return _result('ode_sensitivity', values, 1e-5, 'residual with E shifted by 1e-3 must exceed tol', upper=False)


def check_symmetries(cfg: NumericsCfg) -> List[CheckResult]:
    xs = torch.linspace(-2., 2., 64, dtype=torch.float64)
    matching, joint = [], []
    for spec in _specs(4, SYMMETRY_ZETAS):
        matching.append(check_symmetry(spec, xs))
        v = eval_potential(spec, xs)
        joint.append(float(((v - eval_potential_joint(spec, xs)).abs() / v.abs()).max()))
    crossed = check_symmetry(PotentialSpec(Variant.PLUS, 1., 1), xs, Transform.PT)
    return [
        _result('symmetry', matching, 1e-12, 'PT for minus, shift by i pi/2 with T for plus, 64 points on [-2, 2]'),
        _result('variant_identity', joint, 1e-13, 'cosh / sinh forms against the joint exponential form'),
        _result('symmetry_cross', [crossed], 1e-2, 'plus family under PT must violate the symmetry', upper=False),
    ]


def check_gauge_consistency(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(6, SCAN_ZETA_GRID):
        n = np.arange(spec.m)
        coeffs = (1 + 0.5j) ** n / (n + 1)
        values.append(gauge_consistency(spec, coeffs))
    return _result('gauge_consistency', values, 1e-8, 'mu (A c) against (-d2/dx2 + V)(mu phi), M <= 6')


def check_m4_quartic(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(4, CLOSED_FORM_ZETA_GRID, m_min=4):
        for spectrum in (closed_form_energies(spec, cfg), eigen_spectrum(build_operator(spec), spec, cfg),
                         qes_energies_recursion(spec, cfg)):
            for energy in spectrum.energies:
                values.append(m4_quartic_residual(spec, energy))
                f1, f2 = m4_factors(spec, energy)
                quartic = m4_quartic(spec, energy)
                values.append(abs(f1 * f2 - quartic) / max(1., m4_quartic_scale(spec, energy)))
    return _result('m4_quartic', values, 1e-9, 'M = 4 energies solve the quartic and its factorisation')


def check_trace(cfg: NumericsCfg) -> CheckResult:
    values = []
    for spec in _specs(20, SCAN_ZETA_GRID):
        op = build_operator(spec)
        total = sum(eigen_spectrum(op, spec, cfg).energies)
        diag = float(op.diag.sum())
        values.append(abs(total - diag) / max(1., abs(diag)))
    return _result('trace', values, 1e-9, 'sum of eigenvalues against sum of b_n')


def check_minus_reality(cfg: NumericsCfg) -> CheckResult:
    values = []
    for m in range(1, 31):
        for zeta in (-5., -1., 0.5, 2., 5.):
            spec = PotentialSpec(Variant.MINUS, zeta, m)
            values.append(eigen_spectrum(build_operator(spec), spec, cfg).max_rel_imag)
    return _result('minus_reality', values, cfg.tol_real, 'minus family, M <= 30, relative |Im E|')


def check_conjecture_scan(cfg: NumericsCfg) -> List[CheckResult]:
    report = conjecture_scan(12, SCAN_ZETA_GRID, Variant.MINUS, cfg, progress=False)
    certificate = [r.certificate_dev for r in report.rows if r.certificate_dev is not None]
    return [
        _result('conjecture_scan', [r.max_rel_imag for r in report.rows], cfg.tol_real, f'verdict {report.verdict}'),
        _result('certificate', certificate, 1e-9, 'symmetrised against general eigensolve, M <= 12'),
    ]


def run_verify(
        cfg: Optional[NumericsCfg] = None,
        coeffs_factory: Optional[CoeffsFactory] = None,
) -> List[CheckResult]:
    """ Run every check and return one result per check in a fixed order.

    Args:
        cfg: numeric tolerances for the solvers
        coeffs_factory: replaces the recursion coefficients seen by the char-poly check; a test hook
    """
    cfg = cfg or NumericsCfg()
    checks = [
        ('char_poly', lambda: check_char_poly(cfg, coeffs_factory)),
        ('boundary_leak', lambda: check_boundary_leak(cfg)),
        ('sl2_identity', lambda: check_sl2_identity(cfg)),
        ('sl2_algebra', lambda: check_sl2_algebra(cfg)),
        ('factorization', lambda: check_factorization(cfg)),
        ('closed_forms', lambda: check_closed_forms(cfg)),
        ('route_equivalence', lambda: check_route_equivalence(cfg)),
        ('ode_residuals', lambda: check_ode_residuals(cfg)),
        ('sensitivity', lambda: check_sensitivity(cfg)),
        ('symmetries', lambda: check_symmetries(cfg)),
        ('gauge_consistency', lambda: check_gauge_consistency(cfg)),
        ('m4_quartic', lambda: check_m4_quartic(cfg)),
        ('trace', lambda: check_trace(cfg)),
        ('minus_reality', lambda: check_minus_reality(cfg)),
        ('conjecture_scan', lambda: check_conjecture_scan(cfg)),
    ]
    results = []
    for name, check in checks:
        try:
            out = check()
        except QesError as e:
            logging.error(f'Check {name} raised {type(e).__name__}: {e}')
            out = CheckResult(name=name, passed=False, worst=math.nan, tol=math.nan, cases=0,
                              detail=str(e))
        results.extend(out if isinstance(out, list) else [out])
    for r in results:
        log = logging.info if r.passed else logging.error
        log(f'{r.name}: {"pass" if r.passed else "FAIL"} worst={r.worst:.3e} tol={r.tol:.1e} cases={r.cases}')
    return results
