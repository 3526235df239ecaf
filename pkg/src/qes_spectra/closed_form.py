""" Analytic spectra and wavefunction shapes for M = 1..4.

Each case is a list of branches. A branch carries its energy as a function of zeta, the
coefficient vector of phi(z) it corresponds to, and an evaluator for the unnormalised
psi(x) written directly from its analytic shape (independent of the gauge machinery).
The plus family at M = 4 only has energies in closed form; its phi comes from the recursion.
"""
import cmath
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import torch

from .errors import UnsupportedM, ZetaZero
from .model import Method, NumericsCfg, PotentialSpec, Spectrum, Variant, assemble_spectrum
from .recursion import phi_from_R, recursion_coeffs
from .utils import ComplexLike, from_complex_tensor, greedy_pairing, merge_coalesced, to_complex_tensor

PsiFn = Callable[[float, torch.Tensor], torch.Tensor]


@dataclass(frozen=True)
class ClosedFormBranch:
    label: str
    energy: Callable[[float], complex]
    phi: Optional[Callable[[float], Tuple[complex, ...]]]
    psi: Optional[PsiFn]
    shape: str
    singular_at_zero: bool = False  # shape carries 1/zeta


@dataclass(frozen=True)
class ClosedFormCase:
    m: int
    variant: Variant
    branches: Tuple[ClosedFormBranch, ...]

    def __post_init__(self):
        assert len(self.branches) == self.m, f"Case M={self.m} lists {len(self.branches)} branches."

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(b.label for b in self.branches)

    @property
    def energy_exprs(self) -> Tuple[Callable[[float], complex], ...]:
        return tuple(b.energy for b in self.branches)

    @property
    def psi_shapes(self) -> Tuple[str, ...]:
        return tuple(b.shape for b in self.branches)


def _phase(variant: Variant, zeta: float, x: torch.Tensor) -> torch.Tensor:
    arg = torch.cosh(2 * x) if variant is Variant.PLUS else torch.sinh(2 * x)
    return torch.exp(0.5j * zeta * arg)


def _solve_quadratic(a: complex, b: complex, c: complex) -> Tuple[complex, complex]:
    """ Both roots of a e^2 + b e + c = 0, avoiding cancellation in the smaller one. """
    root = cmath.sqrt(b * b - 4 * a * c)
    if (b.conjugate() * root).real < 0:
        root = -root
    q = -0.5 * (b + root)
    if q == 0:
        return 0j, 0j
    return q / a, c / q


def _case_m1(variant: Variant) -> ClosedFormCase:
    s = variant.sign
    fn = 'cosh' if variant is Variant.PLUS else 'sinh'
    branch = ClosedFormBranch(
        label='0',
        energy=lambda zeta: complex(1 - s * zeta ** 2),
        phi=lambda zeta: (1 + 0j,),
        psi=lambda zeta, x: _phase(variant, zeta, x),
        shape=f'exp(i zeta/2 {fn}(2x))',
    )
    return ClosedFormCase(m=1, variant=variant, branches=(branch,))


def _case_m2(variant: Variant) -> ClosedFormCase:
    branches = []
    for label, pm in (('+', 1), ('-', -1)):
        if variant is Variant.PLUS:
            branches.append(ClosedFormBranch(
                label=label,
                energy=lambda zeta, pm=pm: complex(3 - zeta ** 2, 2 * pm * zeta),
                phi=lambda zeta, pm=pm: (1 + 0j, complex(pm)),
                psi=lambda zeta, x, pm=pm: _phase(variant, zeta, x) * (torch.exp(-x) + pm * torch.exp(x)),
                shape=f'exp(i zeta/2 cosh(2x)) (exp(-x) {label} exp(x))',
            ))
        else:
            branches.append(ClosedFormBranch(
                label=label,
                energy=lambda zeta, pm=pm: complex(3 + 2 * pm * zeta + zeta ** 2),
                phi=lambda zeta, pm=pm: (1 + 0j, pm * 1j),
                psi=lambda zeta, x, pm=pm: _phase(variant, zeta, x) * (torch.exp(-x) + pm * 1j * torch.exp(x)),
                shape=f'exp(i zeta/2 sinh(2x)) (exp(-x) {label} i exp(x))',
            ))
    return ClosedFormCase(m=2, variant=variant, branches=tuple(branches))


def _case_m3(variant: Variant) -> ClosedFormCase:
    s = variant.sign
    plus = variant is Variant.PLUS
    fn, partner = ('cosh', 'sinh') if plus else ('sinh', 'cosh')

    def radical(zeta):
        return cmath.sqrt(1 - s * 4 * zeta ** 2)

    def shift(zeta, pm):
        return -1j / zeta * (1 + pm * radical(zeta))

    def even_part(x):
        # the trigonometric factor that pairs with the +/- branches
        return 2 * torch.cosh(2 * x) if plus else 2 * torch.sinh(2 * x)

    ground = ClosedFormBranch(
        label='0',
        energy=lambda zeta: complex(5 - s * zeta ** 2),
        phi=lambda zeta: (-1 + 0j, 0j, 1 + 0j) if plus else (1 + 0j, 0j, 1 + 0j),
        psi=lambda zeta, x: _phase(variant, zeta, x) * (torch.sinh(2 * x) if plus else torch.cosh(2 * x)),
        shape=f'exp(i zeta/2 {fn}(2x)) {partner}(2x)',
    )
    branches = [ground]
    for label, pm in (('+', 1), ('-', -1)):
        root = f'sqrt(1 {"-" if plus else "+"} 4 zeta^2)'
        branches.append(ClosedFormBranch(
            label=label,
            energy=lambda zeta, pm=pm: 7 - s * zeta ** 2 + 2 * pm * radical(zeta),
            phi=lambda zeta, pm=pm: (1 + 0j if plus else -1 + 0j, shift(zeta, pm), 1 + 0j),
            psi=lambda zeta, x, pm=pm: _phase(variant, zeta, x) * (even_part(x) + shift(zeta, pm)),
            shape=f'exp(i zeta/2 {fn}(2x)) (2 {fn}(2x) - (i/zeta)(1 {label} {root}))',
            singular_at_zero=True,
        ))
    return ClosedFormCase(m=3, variant=variant, branches=tuple(branches))


def _m4_minus_branch(sigma: int, tau: int) -> ClosedFormBranch:
    def rho(zeta):
        return cmath.sqrt(1 - sigma * zeta + zeta ** 2)

    def q(zeta):
        return 1j / zeta * (1 + tau * rho(zeta))

    def energy(zeta):
        return 11 - 2 * sigma * zeta + zeta ** 2 + 4 * tau * rho(zeta)

    def phi(zeta):
        qz = q(zeta)
        return (-0.5 + 0j, -qz + 0.5j * sigma, 0.5 + 1j * sigma * qz, -0.5j * sigma)

    def psi(zeta, x):
        left = torch.exp(-x) - sigma * 1j * torch.exp(x)
        return _phase(Variant.MINUS, zeta, x) * left * (torch.sinh(2 * x) - q(zeta))

    sg, tg = ('+' if sigma > 0 else '-'), ('+' if tau > 0 else '-')
    return ClosedFormBranch(
        label=f'{sg}{tg}',
        energy=energy,
        phi=phi,
        psi=psi,
        shape=(f'exp(i zeta/2 sinh(2x)) (exp(-x) {"-" if sigma > 0 else "+"} i exp(x)) '
               f'(sinh(2x) - (i/zeta)(1 {tg} sqrt(1 {"-" if sigma > 0 else "+"} zeta + zeta^2)))'),
        singular_at_zero=True,
    )


def _case_m4_minus() -> ClosedFormCase:
    branches = tuple(_m4_minus_branch(sigma, tau) for sigma in (1, -1) for tau in (1, -1))
    return ClosedFormCase(m=4, variant=Variant.MINUS, branches=branches)


def _m4_plus_energies(zeta: float, s: int) -> Tuple[complex, complex]:
    # (eps + 8)(eps + s 4i zeta) + 12 zeta^2 = 0, E = eps + 15 - zeta^2
    roots = _solve_quadratic(1 + 0j, complex(8, 4 * s * zeta), complex(12 * zeta ** 2, 32 * s * zeta))
    return tuple(eps + 15 - zeta ** 2 for eps in sorted(roots, key=lambda e: (e.real, e.imag)))


def _case_m4_plus() -> ClosedFormCase:
    branches = []
    for s in (1, -1):
        for k in (0, 1):
            sg = '+' if s > 0 else '-'
            branches.append(ClosedFormBranch(
                label=f'{sg}{k}',
                energy=lambda zeta, s=s, k=k: _m4_plus_energies(zeta, s)[k],
                phi=None,
                psi=None,
                shape=f'root {k} of (eps + 8)(eps {sg} 4i zeta) + 12 zeta^2 = 0, E = eps + 15 - zeta^2',
            ))
    return ClosedFormCase(m=4, variant=Variant.PLUS, branches=tuple(branches))


_CASES: Dict[Tuple[int, Variant], ClosedFormCase] = {}
for _variant in Variant:
    _CASES[(1, _variant)] = _case_m1(_variant)
    _CASES[(2, _variant)] = _case_m2(_variant)
    _CASES[(3, _variant)] = _case_m3(_variant)
_CASES[(4, Variant.MINUS)] = _case_m4_minus()
_CASES[(4, Variant.PLUS)] = _case_m4_plus()


def closed_form_case(m: int, variant: Variant) -> ClosedFormCase:
    key = (m, Variant(variant))
    if key not in _CASES:
        raise UnsupportedM(f"No closed form for M={m}, use the recursion or matrix route.")
    return _CASES[key]


def closed_form_energies(spec: PotentialSpec, cfg: Optional[NumericsCfg] = None) -> Spectrum:
    cfg = cfg or NumericsCfg()
    case = closed_form_case(spec.m, spec.variant)
    zeta = spec.zeta
    energies = [complex(b.energy(zeta)) for b in case.branches]
    if zeta == 0:
        # diagonal operator: attach each energy to the monomial with the same diagonal entry
        coeffs = recursion_coeffs(spec)
        diag = [complex(coeffs.b(n)) for n in range(spec.m)]
        pairing = greedy_pairing(energies, diag)
        vectors = [np.eye(spec.m, dtype=np.complex128)[n] for n in pairing]
    else:
        vectors = [
            b.phi(zeta) if b.phi is not None else phi_from_R(spec, e, cfg)
            for b, e in zip(case.branches, energies)
        ]
    energies, vectors, flags, _ = merge_coalesced(energies, vectors, cfg.degenerate_gap)
    return assemble_spectrum(spec, energies, vectors, Method.CLOSED_FORM, cfg, flags)


@dataclass(frozen=True)
class ClosedFormPsi:
    spec: PotentialSpec
    label: str
    energy: complex
    shape: str
    phi_coeffs: Tuple[complex, ...]
    evaluator: PsiFn

    def __call__(self, x: ComplexLike) -> ComplexLike:
        t, scalar = to_complex_tensor(x)
        return from_complex_tensor(self.evaluator(self.spec.zeta, t), scalar)


def closed_form_psi(spec: PotentialSpec, level_index: int) -> ClosedFormPsi:
    """ Unnormalised wavefunction of one branch of a closed-form case.

    Args:
        spec: potential with M <= 4
        level_index: branch position in the case, e.g. (0, +, -) for M = 3

    Raises:
        UnsupportedM: for M > 4 and for the plus family at M = 4, which has no analytic shape
        ZetaZero: for shapes that carry 1/zeta when zeta = 0
    """
    case = closed_form_case(spec.m, spec.variant)
    if not 0 <= level_index < case.m:
        raise IndexError(f"Level index {level_index} out of range for M={case.m}.")
    branch = case.branches[level_index]
    if branch.psi is None:
        raise UnsupportedM(f"No analytic wavefunction for {spec.variant.value} M={spec.m}, use the matrix route.")
    if branch.singular_at_zero and spec.zeta == 0:
        raise ZetaZero(f"Shape '{branch.shape}' is singular at zeta = 0.")
    return ClosedFormPsi(
        spec=spec,
        label=branch.label,
        energy=complex(branch.energy(spec.zeta)),
        shape=branch.shape,
        phi_coeffs=tuple(complex(c) for c in branch.phi(spec.zeta)),
        evaluator=branch.psi,
    )


def _eps(spec: PotentialSpec, energy: complex) -> complex:
    return complex(energy) - 15 + spec.sign * spec.zeta ** 2


def m4_quartic(spec: PotentialSpec, energy: complex) -> complex:
    """ (eps+8)[(eps+8)(eps^2 + s 16 zeta^2) + s 24 zeta^2 eps] + 144 zeta^4 with eps = E - 15 + s zeta^2. """
    if spec.m != 4:
        raise UnsupportedM(f"The quartic condition belongs to M=4, got M={spec.m}.")
    s, z2 = spec.sign, spec.zeta ** 2
    eps = _eps(spec, energy)
    return (eps + 8) * ((eps + 8) * (eps ** 2 + s * 16 * z2) + s * 24 * z2 * eps) + 144 * z2 ** 2


def m4_quartic_scale(spec: PotentialSpec, energy: complex) -> float:
    """ The quartic with every term replaced by its modulus. """
    z2 = spec.zeta ** 2
    eps = abs(_eps(spec, energy))
    shifted = abs(_eps(spec, energy) + 8)
    return shifted * (shifted * (eps ** 2 + 16 * z2) + 24 * z2 * eps) + 144 * z2 ** 2


def m4_quartic_residual(spec: PotentialSpec, energy: complex) -> float:
    """ |quartic(E)| relative to the summed magnitude of its terms. """
    return abs(m4_quartic(spec, energy)) / max(1., m4_quartic_scale(spec, energy))


def m4_factors(spec: PotentialSpec, energy: complex) -> Tuple[complex, complex]:
    """ The two quadratic factors of the quartic condition. """
    if spec.m != 4:
        raise UnsupportedM(f"The quartic condition belongs to M=4, got M={spec.m}.")
    zeta = spec.zeta
    eps = _eps(spec, energy)
    if spec.variant is Variant.PLUS:
        return tuple((eps + 8) * (eps + pm * 4j * zeta) + 12 * zeta ** 2 for pm in (1, -1))
    # real forms eps^2 + 4(2 -/+ zeta) eps + 4 zeta (-/+ 8 - 3 zeta)
    return tuple((eps + 8) * (eps - pm * 4 * zeta) - 12 * zeta ** 2 for pm in (1, -1))
