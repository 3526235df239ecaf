""" Three-term recursion for the energy polynomials R_n(E).

    R_{n+1} = (E - b_n) R_n - a_n R_{n-1},    R_0 = 1, R_{-1} = 0

with a_n = -s 4n(M-n) zeta^2 and b_n = 4n(M-1-n) + 2M - 1 - s zeta^2 (s = +1 plus, -1 minus).
Since a_M = 0 the recursion decouples after n = M, R_{M+n} = R_M * Rbar_n, and the QES
energies are exactly the roots of R_M. Roots are found by a vectorised Aberth-Ehrlich
iteration that evaluates R_M through the recursion rather than through expanded coefficients.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .constants import ABERTH_ANGLE_OFFSET
from .errors import NonConvergence, NotAnEigenvalue, ZetaZero
from .model import Method, NumericsCfg, PotentialSpec, Spectrum, assemble_spectrum, normalize_phi
from .utils import merge_coalesced


@dataclass(frozen=True)
class RecursionCoeffs:
    m: int
    zeta: float
    sign: int

    def a(self, n: int) -> float:
        # integer factor first, so a_0 and a_M are exact zeros
        return -self.sign * (4 * n * (self.m - n)) * self.zeta ** 2

    def b(self, n: int) -> float:
        return 4 * n * (self.m - 1 - n) + 2 * self.m - 1 - self.sign * self.zeta ** 2


@dataclass(frozen=True, eq=False)
class EnergyPolynomial:
    coeffs: np.ndarray  # coeffs[k] multiplies E^k

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, energy):
        return P.polyval(energy, self.coeffs)


def recursion_coeffs(spec: PotentialSpec) -> RecursionCoeffs:
    return RecursionCoeffs(m=spec.m, zeta=spec.zeta, sign=spec.sign)


def _step(cur: np.ndarray, prev: np.ndarray, a: float, b: float) -> np.ndarray:
    """ One recursion step on coefficient arrays: (E - b) cur - a prev. """
    nxt = np.zeros(len(cur) + 1, dtype=np.complex128)
    nxt[1:] += cur
    nxt[:-1] -= b * cur
    nxt[:len(prev)] -= a * prev
    return nxt


def build_R(
        spec: PotentialSpec,
        n_max: int,
        coeffs: Optional[RecursionCoeffs] = None,
) -> List[EnergyPolynomial]:
    """ R_0 .. R_{n_max} as monic polynomials in E. """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}.")
    coeffs = coeffs or recursion_coeffs(spec)
    polys = [np.ones(1, dtype=np.complex128)]
    prev = np.zeros(1, dtype=np.complex128)
    for n in range(n_max):
        prev, cur = polys[-1], _step(polys[-1], prev, coeffs.a(n), coeffs.b(n))
        polys.append(cur)
    return [EnergyPolynomial(c) for c in polys]


def _evaluate(coeffs: RecursionCoeffs, n: int, energies: np.ndarray):
    """ R_n, dR_n/dE, d2R_n/dE2 and a running rounding bound, all evaluated through the recursion.

    The bound follows the recursion with every term replaced by its modulus, so it majorises
    the expanded-coefficient sum at |E|.
    """
    e = np.asarray(energies, dtype=np.complex128)
    zeros = np.zeros_like(e)
    r_prev, r = zeros, np.ones_like(e)
    d_prev, d = zeros, zeros
    dd_prev, dd = zeros, zeros
    abs_e = np.abs(e)
    bound_prev, bound = np.zeros_like(abs_e), np.ones_like(abs_e)
    for k in range(n):
        a, b = coeffs.a(k), coeffs.b(k)
        shifted = e - b
        r_prev, r, d_prev, d, dd_prev, dd = (
            r, shifted * r - a * r_prev,
            d, r + shifted * d - a * d_prev,
            dd, 2 * d + shifted * dd - a * dd_prev,
        )
        bound_prev, bound = bound, (abs_e + abs(b)) * bound + abs(a) * bound_prev
    return r, d, dd, bound


def eval_R(spec: PotentialSpec, energies, n: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """ R_n(E) (default n = M) and its rounding bound at each energy. """
    r, _, _, bound = _evaluate(recursion_coeffs(spec), spec.m if n is None else n, np.atleast_1d(energies))
    return r, bound


def _scaled_evaluate(coeffs: RecursionCoeffs, n: int, energies: np.ndarray):
    """ R_n, dR_n/dE, d2R_n/dE2 and the running error bound of the recursion, all divided by one
    positive factor per energy.

    The bound follows the recursion with (E - b_k) and a_k replaced by their moduli. Only ratios of
    the four outputs are meaningful, and they stay finite at degrees where R_n itself overflows.
    """
    e = np.asarray(energies, dtype=np.complex128)
    zeros = np.zeros_like(e)
    r_prev, r = zeros, np.ones_like(e)
    d_prev, d = zeros, zeros
    dd_prev, dd = zeros, zeros
    mu_prev, mu = np.zeros(e.shape), np.ones(e.shape)
    for k in range(n):
        a, b = coeffs.a(k), coeffs.b(k)
        shifted = e - b
        r_prev, r, d_prev, d, dd_prev, dd = (
            r, shifted * r - a * r_prev,
            d, r + shifted * d - a * d_prev,
            dd, 2 * d + shifted * dd - a * dd_prev,
        )
        mu_prev, mu = mu, np.abs(shifted) * mu + abs(a) * mu_prev
        scale = np.maximum.reduce([mu, mu_prev, np.abs(d), np.abs(d_prev), np.abs(dd), np.abs(dd_prev)])
        scale = np.where(scale > 0, scale, 1.)
        r_prev, r, d_prev, d, dd_prev, dd = (v / scale for v in (r_prev, r, d_prev, d, dd_prev, dd))
        mu_prev, mu = mu_prev / scale, mu / scale
    return r, d, dd, mu


def _root_distance(coeffs: RecursionCoeffs, m: int, energies: np.ndarray) -> np.ndarray:
    """ Distance from each energy to the nearest root of R_M, estimated from the local model.

    The smaller of the Newton correction |R/R'| and the quadratic estimate sqrt(2|R/R''|); the
    second one stays meaningful at a double root, where R' vanishes with R.
    """
    r, d, dd, _ = _scaled_evaluate(coeffs, m, energies)
    with np.errstate(divide='ignore', invalid='ignore'):
        newton = np.abs(r) / np.abs(d)
        quadratic = np.sqrt(2 * np.abs(r) / np.abs(dd))
    distance = np.fmin(newton, quadratic)
    distance = np.where(r == 0, 0., distance)
    return np.where(np.isnan(distance), np.inf, distance)


def _initial_guesses(coeffs: RecursionCoeffs, m: int) -> np.ndarray:
    # Gershgorin disc of the symmetrised operator: centre on the root centroid, radius enclosing all roots
    diag = np.array([coeffs.b(n) for n in range(m)], dtype=np.float64)
    off = np.sqrt(np.abs([coeffs.a(n) for n in range(m + 1)]))
    centre = diag.mean()
    radius = max(1., max(abs(diag[n] - centre) + off[n] + off[n + 1] for n in range(m)))
    angles = 2 * np.pi * np.arange(m) / m + ABERTH_ANGLE_OFFSET
    return centre + radius * np.exp(1j * angles)


def aberth_roots(
        spec: PotentialSpec,
        cfg: Optional[NumericsCfg] = None,
        coeffs: Optional[RecursionCoeffs] = None,
) -> np.ndarray:
    """ All roots of R_M by Aberth-Ehrlich simultaneous iteration.

    A root stops moving once |R_M| is within rounding of the running error bound of the recursion;
    the sweep ends when every root has stopped or every correction is at rounding level.

    Raises:
        NonConvergence: if after the last sweep some root is further than aberth_tol * max(1, |E|)
            from a root of R_M, as estimated by the local Newton and quadratic models
    """
    cfg = cfg or NumericsCfg()
    coeffs = coeffs or recursion_coeffs(spec)
    m = spec.m
    if m == 1:
        return np.array([coeffs.b(0)], dtype=np.complex128)

    eps = np.finfo(np.float64).eps
    roots = _initial_guesses(coeffs, m)
    iterations = 0
    for iterations in range(1, cfg.aberth_max_iter + 1):
        r, d, _, mu = _scaled_evaluate(coeffs, m, roots)
        done = np.abs(r) <= 4 * m * eps * mu
        if done.all():
            break
        with np.errstate(divide='ignore', invalid='ignore'):
            newton = np.where(d != 0, r / d, 0)
            diff = roots[:, None] - roots[None, :]
            inv = np.where(diff != 0, 1. / diff, 0)
            np.fill_diagonal(inv, 0)
            denom = 1. - newton * inv.sum(axis=1)
            step = np.where(denom != 0, newton / denom, newton)
        step = np.where(done | ~np.isfinite(step), 0, step)
        roots = roots - step
        if np.all(np.abs(step) <= 4 * m * eps * np.maximum(1., np.abs(roots))):
            break

    distance = _root_distance(coeffs, m, roots) / np.maximum(1., np.abs(roots))
    worst = float(np.max(distance))
    if not worst <= cfg.aberth_tol:
        raise NonConvergence(
            f"Aberth iteration for {spec} stopped {worst:.3e} (relative) away from a root after {iterations} sweeps.")
    logging.debug(f'Aberth converged for {spec} in {iterations} sweeps, relative root distance {worst:.3e}.')
    return roots


def _newton_polish(coeffs: RecursionCoeffs, m: int, roots: np.ndarray, steps: int, order: int = 0) -> np.ndarray:
    """ Newton steps on R_M (order 0) or R_M' (order 1), keeping a step only where it lowers the residual. """
    for _ in range(steps):
        values = _evaluate(coeffs, m, roots)
        f, df = values[order], values[order + 1]
        with np.errstate(divide='ignore', invalid='ignore'):
            candidate = roots - np.where(df != 0, f / df, 0)
        f_new = _evaluate(coeffs, m, candidate)[order]
        better = np.isfinite(candidate) & (np.abs(f_new) < np.abs(f))
        roots = np.where(better, candidate, roots)
    return roots


def _phi_raw(coeffs: RecursionCoeffs, spec: PotentialSpec, energy: complex) -> np.ndarray:
    # c_n = R_n(E) t^n / n! with t = s / (2 i zeta). Since a_n t^2 = s n (M - n), zeta only enters
    # through (E - b_n) t; the vector is rescaled to peak 1 as it grows so small zeta cannot overflow it
    t = spec.sign / (2j * spec.zeta)
    out = np.zeros(spec.m, dtype=np.complex128)
    out[0] = 1.
    for n in range(spec.m - 1):
        prev = out[n - 1] if n else 0j
        out[n + 1] = ((energy - coeffs.b(n)) * t * out[n] - spec.sign * (spec.m - n) * prev) / (n + 1)
        peak = abs(out[n + 1])
        if peak > 1.:
            out[:n + 2] /= peak
    return out


def phi_from_R(
        spec: PotentialSpec,
        energy: complex,
        cfg: Optional[NumericsCfg] = None,
) -> List[complex]:
    """ Coefficients of phi(z) for a QES energy, read off the recursion polynomials.

    Raises:
        ZetaZero: the expansion variable z / (2 i zeta) is singular at zeta = 0
        NotAnEigenvalue: E lies further than phi_root_tol * max(1, |E|) from a root of R_M
    """
    if spec.zeta == 0:
        raise ZetaZero("phi_from_R needs zeta != 0, use the matrix eigenvectors at zeta = 0.")
    cfg = cfg or NumericsCfg()
    coeffs = recursion_coeffs(spec)
    energy = complex(energy)
    distance = float(_root_distance(coeffs, spec.m, np.array([energy]))[0])
    if not distance <= cfg.phi_root_tol * max(1., abs(energy)):
        raise NotAnEigenvalue(
            f"E = {energy} is not a root of R_{spec.m} for {spec}: nearest root about {distance:.3e} away.")
    return list(normalize_phi(_phi_raw(coeffs, spec, energy)))


def qes_energies_recursion(spec: PotentialSpec, cfg: Optional[NumericsCfg] = None) -> Spectrum:
    cfg = cfg or NumericsCfg()
    coeffs = recursion_coeffs(spec)
    m = spec.m
    if not any(coeffs.a(n) for n in range(1, m)):
        # zeta = 0, or zeta^2 below the float range: R_M is the product of (E - b_n)
        energies = [complex(coeffs.b(n)) for n in range(m)]
        vectors = [np.eye(m, dtype=np.complex128)[n] for n in range(m)]
        return assemble_spectrum(spec, energies, vectors, Method.RECURSION, cfg)

    roots = aberth_roots(spec, cfg, coeffs)
    roots = _newton_polish(coeffs, m, roots, cfg.newton_steps)
    vectors = [_phi_raw(coeffs, spec, e) for e in roots]
    energies, vectors, flags, groups = merge_coalesced(roots, vectors, cfg.degenerate_gap)
    for group in groups:
        if len(group) != 2:
            continue
        # a double root of R_M is a simple root of R_M'
        refined = _newton_polish(coeffs, m, np.array([energies[group[0]]]), cfg.newton_steps, order=1)[0]
        vector = _phi_raw(coeffs, spec, complex(refined))
        for i in group:
            energies[i], vectors[i] = complex(refined), vector
        logging.debug(f'Coalesced pair at E = {complex(refined)} for {spec}.')
    return assemble_spectrum(spec, energies, vectors, Method.RECURSION, cfg, flags)


def factorization_check(spec: PotentialSpec, n_extra: int) -> float:
    """ Largest normalised coefficient deviation of R_{M+n} - R_M * Rbar_n for n = 1..n_extra.

    Rbar follows the same recursion with coefficients shifted by M and seeds Rbar_0 = 1,
    Rbar_{-1} = 0.
    """
    if n_extra < 1:
        raise ValueError(f"n_extra must be >= 1, got {n_extra}.")
    coeffs = recursion_coeffs(spec)
    m = spec.m
    polys = build_R(spec, m + n_extra, coeffs)
    r_m = polys[m].coeffs
    bar_prev, bar = np.zeros(1, dtype=np.complex128), np.ones(1, dtype=np.complex128)
    worst = 0.
    for n in range(n_extra):
        bar_prev, bar = bar, _step(bar, bar_prev, coeffs.a(m + n), coeffs.b(m + n))
        product = P.polymul(r_m, bar)
        target = polys[m + n + 1].coeffs
        scale = max(np.abs(target).max(), np.abs(product).max())
        worst = max(worst, float(np.abs(target - product).max() / scale))
    return worst
