""" Potential families and the value types shared by every solution route.

Both families are written with a single sign s = +1 (plus, cosh form) or s = -1 (minus, sinh form):

    V(x) = -[zeta/2 (e^{2x} + s e^{-2x}) - iM]^2

Every paired formula in the package resolves its upper/lower sign through `Variant.sign`.
"""
import logging
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import torch

from .constants import ABERTH_MAX_ITER, ABERTH_TOL, DEGENERATE_GAP, NEWTON_STEPS, PHI_ROOT_TOL, \
    PHI_ZERO_CUTOFF, ROUTE_TOL, TOL_REAL
from .utils import ComplexLike, from_complex_tensor, to_complex_tensor, to_sample_tensor


class Variant(str, Enum):
    PLUS = 'plus'  # -(zeta cosh 2x - iM)^2, not PT invariant
    MINUS = 'minus'  # -(zeta sinh 2x - iM)^2, PT symmetric

    @property
    def sign(self) -> int:
        """ Upper (+1) or lower (-1) sign of the paired formulas. """
        return 1 if self is Variant.PLUS else -1


class Reality(str, Enum):
    REAL = 'real'
    COMPLEX = 'complex'


class Method(str, Enum):
    CLOSED_FORM = 'closed_form'
    MATRIX = 'matrix'
    RECURSION = 'recursion'


class Transform(str, Enum):
    PT = 'pt'  # x -> -x, i -> -i
    SHIFT_T = 'shift_t'  # x -> i pi/2 - x, i -> -i


@dataclass
class NumericsCfg:
    tol_real: float = TOL_REAL
    degenerate_gap: float = DEGENERATE_GAP
    aberth_tol: float = ABERTH_TOL
    aberth_max_iter: int = ABERTH_MAX_ITER
    newton_steps: int = NEWTON_STEPS
    phi_root_tol: float = PHI_ROOT_TOL
    route_tol: float = ROUTE_TOL

    def __post_init__(self):
        assert self.tol_real > 0, f"tol_real must be positive, got {self.tol_real}."
        assert self.degenerate_gap >= 0, f"degenerate_gap must be non-negative, got {self.degenerate_gap}."
        assert self.aberth_max_iter >= 1, f"aberth_max_iter must be >= 1, got {self.aberth_max_iter}."
        assert self.newton_steps >= 0, f"newton_steps must be >= 0, got {self.newton_steps}."


_NUMERICS_KEYS = set(asdict(NumericsCfg()).keys())


def merge_numerics_dict(
        base: Union[NumericsCfg, Dict],
        overlay: Optional[Dict],
) -> Dict:
    """ Merge overlay key-value pairs on top of a base numerics cfg or dict.
    Unknown keys and None values in the overlay are dropped.
    """
    if isinstance(base, NumericsCfg):
        base_clean = asdict(base)
    else:
        base_clean = {k: v for k, v in base.items() if k in _NUMERICS_KEYS}
    if overlay:
        overlay_clean = {k: v for k, v in overlay.items() if k in _NUMERICS_KEYS and v is not None}
        base_clean.update(overlay_clean)
    return base_clean


@dataclass(frozen=True)
class PotentialSpec:
    variant: Variant
    zeta: float
    m: int

    def __post_init__(self):
        object.__setattr__(self, 'variant', Variant(self.variant))
        zeta = float(self.zeta)
        if not math.isfinite(zeta):
            raise ValueError(f"zeta must be finite, got {self.zeta}.")
        object.__setattr__(self, 'zeta', zeta)
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}.")
        object.__setattr__(self, 'm', int(self.m))

    @property
    def sign(self) -> int:
        return self.variant.sign

    @property
    def j(self) -> float:
        """ Spin of the finite sl(2) representation. """
        return (self.m - 1) / 2

    def with_zeta(self, zeta: float) -> 'PotentialSpec':
        return replace(self, zeta=zeta)


@dataclass(frozen=True)
class QesLevel:
    energy: complex
    phi_coeffs: Tuple[complex, ...]  # c_0..c_{M-1}, highest nonzero entry is 1
    reality: Reality
    pair_id: Optional[int] = None  # shared by complex-conjugate partners
    degenerate: bool = False  # coalesced with another level at an exceptional point

    def __post_init__(self):
        if not any(c != 0 for c in self.phi_coeffs):
            raise ValueError("phi_coeffs must not be the zero vector.")


@dataclass(frozen=True)
class Spectrum:
    spec: PotentialSpec
    levels: Tuple[QesLevel, ...]
    method: Method

    def __post_init__(self):
        if len(self.levels) != self.spec.m:
            raise ValueError(f"Spectrum of M={self.spec.m} needs {self.spec.m} levels, got {len(self.levels)}.")

    @property
    def energies(self) -> Tuple[complex, ...]:
        return tuple(level.energy for level in self.levels)

    @property
    def max_imag(self) -> float:
        return max(abs(e.imag) for e in self.energies)

    @property
    def max_rel_imag(self) -> float:
        return max(abs(e.imag) / max(1., abs(e)) for e in self.energies)

    @property
    def is_real(self) -> bool:
        return all(level.reality is Reality.REAL for level in self.levels)


def classify(energy: complex, tol_real: float = TOL_REAL) -> Reality:
    if abs(energy.imag) <= tol_real * max(1., abs(energy)):
        return Reality.REAL
    return Reality.COMPLEX


def normalize_phi(coeffs: Sequence[complex], cutoff: float = PHI_ZERO_CUTOFF) -> Tuple[complex, ...]:
    """ Scale a coefficient vector so its highest significant entry equals 1. """
    c = np.asarray(coeffs, dtype=np.complex128)
    peak = np.abs(c).max() if c.size else 0.
    if not peak > 0 or not np.isfinite(peak):
        raise ValueError("Cannot normalize a zero or non-finite coefficient vector.")
    top = int(np.nonzero(np.abs(c) > cutoff * peak)[0][-1])
    c = c / c[top]
    return tuple(complex(v) for v in c)


def _sort_key(energy: complex):
    # quantize Re so conjugate partners with Re differing by rounding keep Im order
    return float(f"{energy.real:.9e}"), energy.imag


def assemble_spectrum(
        spec: PotentialSpec,
        energies: Sequence[complex],
        vectors: Sequence[Sequence[complex]],
        method: Method,
        cfg: Optional[NumericsCfg] = None,
        degenerate: Optional[Sequence[bool]] = None,
) -> Spectrum:
    """ Sort eigenpairs, classify reality and link conjugate partners into a Spectrum. """
    cfg = cfg or NumericsCfg()
    assert len(energies) == len(vectors) == spec.m, \
        f"Expected {spec.m} eigenpairs, got {len(energies)} energies and {len(vectors)} vectors."
    degenerate = list(degenerate) if degenerate is not None else [False] * spec.m
    order = sorted(range(spec.m), key=lambda i: _sort_key(complex(energies[i])))
    values = [complex(energies[i]) for i in order]
    realities = [classify(e, cfg.tol_real) for e in values]

    pair_ids = [None] * spec.m
    next_id = 0
    for i, e in enumerate(values):
        if realities[i] is Reality.REAL or pair_ids[i] is not None:
            continue
        best, best_dist = None, math.inf
        for k in range(i + 1, spec.m):
            if realities[k] is Reality.REAL or pair_ids[k] is not None:
                continue
            dist = abs(values[k] - e.conjugate())
            if dist < best_dist:
                best, best_dist = k, dist
        if best is not None and best_dist <= cfg.route_tol * max(1., abs(e)):
            pair_ids[i] = pair_ids[best] = next_id
            next_id += 1

    levels = tuple(
        QesLevel(
            energy=values[pos],
            phi_coeffs=normalize_phi(vectors[i]),
            reality=realities[pos],
            pair_id=pair_ids[pos],
            degenerate=bool(degenerate[i]),
        )
        for pos, i in enumerate(order)
    )
    return Spectrum(spec=spec, levels=levels, method=method)


def _inner(spec: PotentialSpec, t: torch.Tensor) -> torch.Tensor:
    if spec.variant is Variant.PLUS:
        return spec.zeta * torch.cosh(2 * t) - 1j * spec.m
    return spec.zeta * torch.sinh(2 * t) - 1j * spec.m


def eval_potential(spec: PotentialSpec, x: ComplexLike) -> ComplexLike:
    """ V(x) of the chosen family; accepts a scalar or a tensor of points. """
    t, scalar = to_complex_tensor(x)
    return from_complex_tensor(-_inner(spec, t) ** 2, scalar)


def eval_potential_joint(spec: PotentialSpec, x: ComplexLike) -> ComplexLike:
    """ V(x) through the exponential form shared by both families. """
    t, scalar = to_complex_tensor(x)
    inner = 0.5 * spec.zeta * (torch.exp(2 * t) + spec.sign * torch.exp(-2 * t)) - 1j * spec.m
    return from_complex_tensor(-inner ** 2, scalar)


def default_transform(variant: Variant) -> Transform:
    return Transform.PT if Variant(variant) is Variant.MINUS else Transform.SHIFT_T


def check_symmetry(
        spec: PotentialSpec,
        x_samples,
        transform: Optional[Transform] = None,
) -> float:
    """ Largest relative deviation of V from its image under an antilinear symmetry.

    The point is conjugated before the map and the value after it, which realises the
    antilinear operation on an analytic function. For real x and the PT map this is
    conj(V(-x)) against V(x).

    Args:
        spec: potential to test
        x_samples: nonempty sequence or tensor of (complex) points
        transform: symmetry to test, defaults to the one the variant carries

    Returns:
        max over samples of |conj(V(T(conj x))) - V(x)| / max(1, |V(x)|)
    """
    xs = to_sample_tensor(x_samples)
    transform = Transform(transform) if transform is not None else default_transform(spec.variant)
    if transform is Transform.PT:
        mapped = -xs.conj()
    else:
        mapped = (1j * math.pi / 2 - xs).conj()
    image = eval_potential(spec, mapped).conj()
    values = eval_potential(spec, xs)
    deviation = float(((image - values).abs() / values.abs().clamp(min=1.)).max())
    logging.debug(f'Symmetry {transform.value} on {spec}: deviation {deviation:.3e}.')
    return deviation
