""" Gauge factor, reconstruction of psi(x) = mu(z) phi(z) at z = e^{2x}, and the Schroedinger residual oracle.

Writing psi = e^{g} P with P(x) = sum_n c_n e^{2nx} and

    g  = (1-M) x + (i zeta/2) C(x),    C = cosh 2x (plus) or sinh 2x (minus)
    g' = (1-M) + i zeta S(x),          S = sinh 2x (plus) or cosh 2x (minus)
    g'' = 2i zeta C(x)

the second derivative is psi'' = e^{g} [(g'' + g'^2) P + 2 g' P' + P'']. All oracle quantities are
taken with e^{g} and the dominant e^{2kx} divided out, so nothing overflows on the sample window.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import torch

from .constants import FD_STEP, LOG_GUARD, NODE_FLOOR, PT_PHASE_TOL
from .errors import DomainError, VariantMismatch
from .gauge_matrix import build_operator, operator_residual
from .model import PotentialSpec, QesLevel, Reality, Variant, classify, eval_potential
from .utils import ComplexLike, chebyshev_samples, from_complex_tensor, to_complex_tensor, to_sample_tensor


@dataclass(frozen=True)
class GaugeWavefunction:
    spec: PotentialSpec
    energy: complex
    phi_coeffs: Tuple[complex, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.phi_coeffs)
        if len(coeffs) != self.spec.m:
            raise ValueError(f"Expected {self.spec.m} phi coefficients, got {len(coeffs)}.")
        if not any(c != 0 for c in coeffs):
            raise ValueError("phi_coeffs must not be the zero vector.")
        object.__setattr__(self, 'phi_coeffs', coeffs)
        object.__setattr__(self, 'energy', complex(self.energy))

    def operator_residual(self) -> float:
        """ Relative residual of phi_coeffs against the gauged operator at this energy. """
        return operator_residual(build_operator(self.spec), self.energy, self.phi_coeffs)

    def with_energy(self, energy: complex) -> 'GaugeWavefunction':
        return GaugeWavefunction(spec=self.spec, energy=energy, phi_coeffs=self.phi_coeffs)


def from_level(spec: PotentialSpec, level: QesLevel) -> GaugeWavefunction:
    return GaugeWavefunction(spec=spec, energy=level.energy, phi_coeffs=level.phi_coeffs)


def gauge_factor(spec: PotentialSpec, z: ComplexLike) -> ComplexLike:
    """ mu(z) = z^{(1-M)/2} exp((i zeta/4)(z + s/z)), principal branch for the half-integer power.

    Raises:
        DomainError: if any z is zero
    """
    t, scalar = to_complex_tensor(z)
    if bool((t == 0).any()):
        raise DomainError("gauge_factor is singular at z = 0.")
    power = t ** ((1 - spec.m) / 2)
    mu = power * torch.exp(0.25j * spec.zeta * (t + spec.sign / t))
    return from_complex_tensor(mu, scalar)


def _trig(spec: PotentialSpec, xs: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    cosh, sinh = torch.cosh(2 * xs), torch.sinh(2 * xs)
    return (cosh, sinh) if spec.variant is Variant.PLUS else (sinh, cosh)


def _exponent(spec: PotentialSpec, xs: torch.Tensor):
    """ g, g' and g'' at each sample. """
    c, s = _trig(spec, xs)
    g = (1 - spec.m) * xs + 0.5j * spec.zeta * c
    dg = (1 - spec.m) + 1j * spec.zeta * s
    ddg = 2j * spec.zeta * c
    return g, dg, ddg


def _series(coeffs: Sequence[complex], xs: torch.Tensor, lo: Optional[int] = None, hi: Optional[int] = None):
    """ P, P' and P'' divided by e^{2kx}, with k the top index for Re x > 0 and the bottom one otherwise.

    The index range defaults to the support of coeffs so every retained exponential is bounded by 1.
    """
    c = torch.as_tensor(coeffs, dtype=torch.complex128)
    support = torch.nonzero(c.abs() > 0).flatten()
    lo = int(support[0]) if lo is None else lo
    hi = int(support[-1]) if hi is None else hi
    c = c[lo:hi + 1]
    n = torch.arange(lo, hi + 1, dtype=torch.float64).to(torch.complex128)
    k = torch.where(
        xs.real > 0,
        torch.tensor(float(hi), dtype=torch.float64),
        torch.tensor(float(lo), dtype=torch.float64),
    ).to(torch.complex128)
    basis = torch.exp(2 * (n[None, :] - k[:, None]) * xs[:, None])
    return basis @ c, basis @ (2 * n * c), basis @ (4 * n ** 2 * c), k


def eval_psi(wf: GaugeWavefunction, x: ComplexLike) -> ComplexLike:
    """ psi(x) = mu(e^{2x}) sum_n c_n e^{2nx}; scalar in, scalar out. """
    t, scalar = to_complex_tensor(x)
    xs = t.reshape(-1)
    g, _, _ = _exponent(wf.spec, xs)
    p, _, _, k = _series(wf.phi_coeffs, xs)
    lead = g + 2 * k * xs
    far = xs.real.abs() > LOG_GUARD
    # log-magnitude assembly keeps a huge exp(lead) from meeting a small p as inf * 0
    log_form = torch.exp(lead + torch.log(p))
    psi = torch.where(far, log_form, torch.exp(lead) * p)
    return from_complex_tensor(psi.reshape(t.shape), scalar)


def _analytic_terms(wf: GaugeWavefunction, xs: torch.Tensor):
    _, dg, ddg = _exponent(wf.spec, xs)
    p, dp, ddp, _ = _series(wf.phi_coeffs, xs)
    t1 = (ddg + dg ** 2) * p
    t2 = 2 * dg * dp
    return p, t1, t2, ddp


def pointwise_residual(wf: GaugeWavefunction, x_samples=None, mode: str = 'analytic') -> torch.Tensor:
    """ |-psi'' + (V - E) psi| relative to the local magnitude of the equation's terms.

    Args:
        wf: wavefunction to test
        x_samples: real sample points, defaults to Chebyshev nodes on [-3, 3]
        mode: 'analytic' for the chain-rule second derivative, 'fd' for a 5-point stencil

    Returns:
        float64 tensor with one relative residual per sample
    """
    xs = to_sample_tensor(x_samples if x_samples is not None else chebyshev_samples())
    tiny = torch.finfo(torch.float64).tiny
    energy = wf.energy
    if mode == 'analytic':
        p, t1, t2, t3 = _analytic_terms(wf, xs)
        second = t1 + t2 + t3
        v = eval_potential(wf.spec, xs)
        r = -second + (v - energy) * p
        scale = torch.stack([
            (energy * p).abs(),
            second.abs(),
            NODE_FLOOR * (t1.abs() + t2.abs() + t3.abs()),
        ]).amax(dim=0)
    elif mode == 'fd':
        h = FD_STEP
        shifts = torch.tensor([-2., -1., 0., 1., 2.], dtype=torch.float64).to(torch.complex128) * h
        grid = eval_psi(wf, xs[:, None] + shifts[None, :])
        weights = torch.tensor([-1., 16., -30., 16., -1.], dtype=torch.float64).to(torch.complex128)
        second = grid @ weights / (12 * h ** 2)
        psi = grid[:, 2]
        v = eval_potential(wf.spec, xs)
        r = -second + (v - energy) * psi
        scale = torch.stack([
            (energy * psi).abs(),
            second.abs(),
            (v * psi).abs(),
            grid.abs().amax(dim=1),
        ]).amax(dim=0)
    else:
        raise ValueError(f"Unknown residual mode '{mode}', expected 'analytic' or 'fd'.")
    return r.abs() / scale.clamp_min(tiny)


def ode_residual(wf: GaugeWavefunction, x_samples=None, mode: str = 'analytic') -> float:
    """ Largest pointwise relative residual of the Schroedinger equation over the samples. """
    residual = float(pointwise_residual(wf, x_samples, mode).max())
    logging.debug(f'ODE residual ({mode}) for {wf.spec} at E = {wf.energy}: {residual:.3e}.')
    return residual


class PtStatus(str, Enum):
    UNBROKEN = 'unbroken'
    BROKEN = 'broken'
    INDETERMINATE = 'indeterminate'


@dataclass(frozen=True)
class PtCheck:
    status: PtStatus
    theta: Optional[float]  # global phase of conj(psi(-x)) / psi(x)
    deviation: float


def psi_pt_check(wf: GaugeWavefunction, x_samples, tol: float = PT_PHASE_TOL) -> PtCheck:
    """ Test conj(psi(-x)) = e^{i theta} psi(x) on real samples.

    The phase is fitted at the sample of largest |psi| and verified at every sample relative to
    max |psi|. A nonreal energy is always reported broken.

    Raises:
        VariantMismatch: for the plus variant, which carries no PT symmetry
    """
    if wf.spec.variant is not Variant.MINUS:
        raise VariantMismatch("psi_pt_check applies to the PT-symmetric minus variant only.")
    xs = to_sample_tensor(x_samples, torch.float64).to(torch.complex128)
    psi = eval_psi(wf, xs)
    mirrored = eval_psi(wf, -xs).conj()
    magnitude = psi.abs()
    pivot = int(torch.argmax(magnitude))
    peak = float(magnitude[pivot])
    if not peak > 0 or xs.numel() < 2:
        return PtCheck(status=PtStatus.INDETERMINATE, theta=None, deviation=math.nan)

    ratio = complex(mirrored[pivot] / psi[pivot])
    theta = math.atan2(ratio.imag, ratio.real)
    phase = complex(math.cos(theta), math.sin(theta))
    deviation = float((mirrored - phase * psi).abs().max()) / peak
    unbroken = deviation <= tol and classify(wf.energy) is Reality.REAL
    return PtCheck(
        status=PtStatus.UNBROKEN if unbroken else PtStatus.BROKEN,
        theta=theta,
        deviation=deviation,
    )


def gauge_consistency(spec: PotentialSpec, phi_coeffs: Sequence[complex], x_samples=None) -> float:
    """ Compare mu (A c)(z) with (-d^2/dx^2 + V)(mu phi) for an arbitrary coefficient vector c.

    Returns:
        largest pointwise deviation relative to the magnitude of the terms involved
    """
    xs = to_sample_tensor(x_samples if x_samples is not None else chebyshev_samples(16))
    c = torch.as_tensor(phi_coeffs, dtype=torch.complex128)
    assert c.numel() == spec.m, f"Expected {spec.m} coefficients, got {c.numel()}."
    image = build_operator(spec).apply(c)

    _, dg, ddg = _exponent(spec, xs)
    p, dp, ddp, _ = _series(c, xs, lo=0, hi=spec.m - 1)
    q, _, _, _ = _series(image, xs, lo=0, hi=spec.m - 1)
    t1, t2 = (ddg + dg ** 2) * p, 2 * dg * dp
    vp = eval_potential(spec, xs) * p
    direct = -(t1 + t2 + ddp) + vp
    scale = torch.stack([q.abs(), t1.abs() + t2.abs() + ddp.abs() + vp.abs()]).amax(dim=0)
    return float(((direct - q).abs() / scale.clamp_min(torch.finfo(torch.float64).tiny)).max())
