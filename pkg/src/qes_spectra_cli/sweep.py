""" Zeta sweeps with level tracking, reality-threshold bisection and the reality scan. """
import logging
from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence, Tuple

import numpy as np

from qes_spectra import Method, NumericsCfg, PotentialSpec, Reality, Spectrum, Variant, build_operator, \
    closed_form_energies, eigen_spectrum, greedy_pairing, multiset_deviation, qes_energies_recursion
from qes_spectra.constants import THRESHOLD_PROBE, THRESHOLD_WIDTH, THRESHOLD_ZETA_HI

from .parallel import ordered_map

METHOD_NAMES = {
    'closed': Method.CLOSED_FORM,
    'matrix': Method.MATRIX,
    'recursion': Method.RECURSION,
}


def solve_spectrum(spec: PotentialSpec, method='matrix', cfg: Optional[NumericsCfg] = None) -> Spectrum:
    method = METHOD_NAMES.get(method, method)
    method = Method(method)
    if method is Method.CLOSED_FORM:
        return closed_form_energies(spec, cfg)
    if method is Method.RECURSION:
        return qes_energies_recursion(spec, cfg)
    return eigen_spectrum(build_operator(spec), spec, cfg)


def zeta_grid(zeta_min: float, zeta_max: float, steps: int) -> Tuple[float, ...]:
    if steps < 2:
        raise ValueError(f"A sweep needs at least 2 steps, got {steps}.")
    return tuple(float(z) for z in np.linspace(zeta_min, zeta_max, steps))


@dataclass(frozen=True)
class SweepResult:
    variant: Variant
    m: int
    zeta_grid: Tuple[float, ...]
    spectra: Tuple[Spectrum, ...]
    max_imag: Tuple[float, ...]
    tracks: Tuple[Tuple[int, ...], ...]  # tracks[i][k] = index into spectra[i].levels followed by curve k

    def __post_init__(self):
        n = len(self.zeta_grid)
        if not len(self.spectra) == len(self.max_imag) == len(self.tracks) == n:
            raise ValueError("zeta_grid, spectra, max_imag and tracks must have equal length.")

    def curve(self, k: int) -> np.ndarray:
        """ Energies followed by tracked curve k along the grid. """
        return np.array([s.levels[t[k]].energy for s, t in zip(self.spectra, self.tracks)], dtype=np.complex128)


def track_levels(spectra: Sequence[Spectrum]) -> Tuple[Tuple[int, ...], ...]:
    """ Nearest-continuation tracking: each curve moves to the closest unclaimed level of the next point. """
    if not spectra:
        return ()
    tracks = [tuple(range(len(spectra[0].levels)))]
    for prev, cur in zip(spectra[:-1], spectra[1:]):
        followed = [prev.levels[i].energy for i in tracks[-1]]
        tracks.append(tuple(greedy_pairing(followed, cur.energies)))
    return tuple(tracks)


def run_sweep(
        variant: Variant,
        m: int,
        grid: Sequence[float],
        method='matrix',
        cfg: Optional[NumericsCfg] = None,
        progress: bool = True,
) -> SweepResult:
    cfg = cfg or NumericsCfg()
    template = PotentialSpec(variant=variant, zeta=0., m=m)
    solve = partial(_solve_at, template, method, cfg)
    spectra = ordered_map(solve, list(grid), desc='sweep', progress=progress)
    # tracking depends on the previous point, so it runs serially after the grid is assembled
    tracks = track_levels(spectra)
    logging.info(f'Swept {template.variant.value} M={m} over {len(grid)} zeta points with the {method} route.')
    return SweepResult(
        variant=template.variant,
        m=m,
        zeta_grid=tuple(float(z) for z in grid),
        spectra=tuple(spectra),
        max_imag=tuple(s.max_imag for s in spectra),
        tracks=tracks,
    )


def _solve_at(template: PotentialSpec, method, cfg: NumericsCfg, zeta: float) -> Spectrum:
    return solve_spectrum(template.with_zeta(zeta), method, cfg)


@dataclass(frozen=True)
class ThresholdResult:
    m: int
    variant: Variant
    zeta_c: Optional[float]
    bracket_width: float
    note: str = ''


def find_threshold(
        variant: Variant,
        m: int,
        cfg: Optional[NumericsCfg] = None,
        zeta_hi: float = THRESHOLD_ZETA_HI,
        probe: float = THRESHOLD_PROBE,
        width: float = THRESHOLD_WIDTH,
        method='matrix',
) -> ThresholdResult:
    """ Bisect the smallest positive zeta at which the spectrum stops being real.

    The search assumes the spectrum is real on (0, zeta_c] and complex beyond, as for the plus family.
    Returns zeta_c = 0 when the spectrum is already complex at the smallest probe, and zeta_c = None
    for the minus family or when the spectrum is still real at zeta_hi.
    """
    cfg = cfg or NumericsCfg()
    variant = Variant(variant)
    if variant is Variant.MINUS:
        return ThresholdResult(
            m=m, variant=variant, zeta_c=None, bracket_width=0.,
            note='minus family is conjectured to stay real for every zeta; no threshold searched')

    template = PotentialSpec(variant=variant, zeta=0., m=m)

    def is_real(zeta):
        return solve_spectrum(template.with_zeta(zeta), method, cfg).is_real

    if not is_real(probe):
        return ThresholdResult(
            m=m, variant=variant, zeta_c=0., bracket_width=probe,
            note=f'complex already at zeta = {probe:g}')
    if is_real(zeta_hi):
        return ThresholdResult(
            m=m, variant=variant, zeta_c=None, bracket_width=0.,
            note=f'real on the whole interval up to zeta = {zeta_hi:g}')

    lo, hi = probe, zeta_hi
    steps = 0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if is_real(mid):
            lo = mid
        else:
            hi = mid
        steps += 1
    logging.debug(f'Threshold bisection for M={m} took {steps} steps, bracket [{lo!r}, {hi!r}].')
    return ThresholdResult(m=m, variant=variant, zeta_c=0.5 * (lo + hi), bracket_width=hi - lo)


@dataclass(frozen=True)
class ScanRow:
    m: int
    zeta: float
    max_rel_imag: float
    n_complex: int
    certificate_dev: Optional[float]  # symmetrised vs general eigensolve, minus family only
    closed_form_dev: Optional[float]  # matrix vs closed forms, M <= 4


@dataclass(frozen=True)
class ScanReport:
    variant: Variant
    rows: Tuple[ScanRow, ...]
    verdict: str
    tol_real: float

    @property
    def max_rel_imag(self) -> float:
        return max(r.max_rel_imag for r in self.rows)

    @property
    def max_certificate_dev(self) -> Optional[float]:
        devs = [r.certificate_dev for r in self.rows if r.certificate_dev is not None]
        return max(devs) if devs else None


def _scan_point(variant: Variant, cfg: NumericsCfg, point: Tuple[int, float]) -> ScanRow:
    m, zeta = point
    spec = PotentialSpec(variant=variant, zeta=zeta, m=m)
    op = build_operator(spec)
    spectrum = eigen_spectrum(op, spec, cfg)
    certificate_dev = None
    if variant is Variant.MINUS and zeta != 0:
        direct = eigen_spectrum(op, spec, cfg, symmetrize=False)
        certificate_dev = multiset_deviation(spectrum.energies, direct.energies)
    closed_form_dev = None
    if m <= 4:
        closed_form_dev = multiset_deviation(spectrum.energies, closed_form_energies(spec, cfg).energies)
    return ScanRow(
        m=m,
        zeta=zeta,
        max_rel_imag=spectrum.max_rel_imag,
        n_complex=sum(level.reality is Reality.COMPLEX for level in spectrum.levels),
        certificate_dev=certificate_dev,
        closed_form_dev=closed_form_dev,
    )


def conjecture_scan(
        m_max: int,
        grid: Sequence[float],
        variant: Variant = Variant.MINUS,
        cfg: Optional[NumericsCfg] = None,
        progress: bool = True,
) -> ScanReport:
    """ Reality of the matrix-route spectrum for every M = 1..m_max and zeta in the grid. """
    cfg = cfg or NumericsCfg()
    variant = Variant(variant)
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}.")
    if m_max < 5:
        logging.warning(f'm_max = {m_max} stays within the M <= 4 cases that have closed forms.')
    points = [(m, float(z)) for m in range(1, m_max + 1) for z in grid]
    rows = ordered_map(partial(_scan_point, variant, cfg), points, desc='scan', progress=progress)
    real = all(r.max_rel_imag <= cfg.tol_real for r in rows)
    verdict = 'supports' if real else 'violates'
    logging.info(f'Reality scan of {variant.value} M <= {m_max}: {verdict} (tol_real = {cfg.tol_real:g}).')
    return ScanReport(variant=variant, rows=tuple(rows), verdict=verdict, tol_real=cfg.tol_real)
