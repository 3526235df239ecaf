""" The gauged Hamiltonian as an M x M tridiagonal operator on {1, z, ..., z^{M-1}}.

Column n holds the image of z^n (s = +1 plus, -1 minus):

    H_g z^n = 2i zeta (M-1-n) z^{n+1} + b_n z^n + s 2i zeta n z^{n-1}

The raising coefficient vanishes at n = M-1, so the polynomial subspace of degree < M is
invariant and the M x M matrix is exact. Equivalently H_g = -4 J0^2 - 2i zeta J+ + s 2i zeta J-
+ M^2 - s zeta^2 with the spin j = (M-1)/2 generators J+ = z^2 d/dz - 2jz, J0 = z d/dz - j, J- = d/dz.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
from numpy.polynomial import polynomial as P

from .errors import EigensolverFailure, VariantMismatch, ZetaZero
from .model import Method, NumericsCfg, PotentialSpec, Spectrum, Variant, assemble_spectrum
from .recursion import EnergyPolynomial, build_R
from .utils import merge_coalesced


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    dim: int
    diag: torch.Tensor  # float64, diag[n] = b_n
    sup: torch.Tensor  # complex128, sup[n] = A[n+1][n], coefficient of z^{n+1} in H_g z^n
    sub: torch.Tensor  # complex128, sub[n] = A[n][n+1], coefficient of z^n in H_g z^{n+1}
    variant: Variant

    def to_dense(self) -> torch.Tensor:
        a = torch.diag(self.diag.to(torch.complex128))
        if self.dim > 1:
            a = a + torch.diag(self.sup, -1) + torch.diag(self.sub, 1)
        return a

    def apply(self, coeffs) -> torch.Tensor:
        """ Coefficients of H_g phi for phi = sum_n coeffs[n] z^n. """
        c = torch.as_tensor(coeffs, dtype=torch.complex128)
        return self.to_dense() @ c

    @property
    def off_diagonal_products(self) -> torch.Tensor:
        """ A[n+1][n] * A[n][n+1], equal to the recursion coefficient a_{n+1}. """
        return self.sup * self.sub


@dataclass(frozen=True, eq=False)
class Sl2Generators:
    j: float
    jp: torch.Tensor
    j0: torch.Tensor
    jm: torch.Tensor

    def commutator_deviation(self) -> float:
        """ Largest entry of [J0, J+] - J+, [J0, J-] + J- and [J+, J-] + 2 J0. """
        def comm(x, y):
            return x @ y - y @ x

        residuals = (
            comm(self.j0, self.jp) - self.jp,
            comm(self.j0, self.jm) + self.jm,
            comm(self.jp, self.jm) + 2 * self.j0,
        )
        return max(float(r.abs().max()) if r.numel() else 0. for r in residuals)

    def casimir(self) -> torch.Tensor:
        """ J0^2 - (J+ J- + J- J+) / 2, which is j(j+1) times the identity. """
        return self.j0 @ self.j0 - 0.5 * (self.jp @ self.jm + self.jm @ self.jp)


def sl2_generators(m: int) -> Sl2Generators:
    """ Spin (m-1)/2 representation of sl(2) on polynomials of degree < m. """
    assert m >= 1, f"Representation dimension must be >= 1, got {m}."
    j = (m - 1) / 2
    n = torch.arange(m, dtype=torch.float64)
    jp = torch.diag((n[:-1] - 2 * j).to(torch.complex128), -1)
    j0 = torch.diag((n - j).to(torch.complex128))
    jm = torch.diag(n[1:].to(torch.complex128), 1)
    return Sl2Generators(j=j, jp=jp, j0=j0, jm=jm)


def build_operator(spec: PotentialSpec) -> TridiagonalOperator:
    m, zeta, s = spec.m, spec.zeta, spec.sign
    n = torch.arange(m, dtype=torch.float64)
    diag = 4 * n * (m - 1 - n) + 2 * m - 1 - s * zeta ** 2
    k = torch.arange(m - 1, dtype=torch.float64).to(torch.complex128)
    sup = (2j * zeta) * (m - 1 - k)
    sub = (s * 2j * zeta) * (k + 1)
    return TridiagonalOperator(dim=m, diag=diag, sup=sup, sub=sub, variant=spec.variant)


def _from_dense(a: torch.Tensor, variant: Variant) -> TridiagonalOperator:
    return TridiagonalOperator(
        dim=a.shape[0],
        diag=torch.diagonal(a).real.clone(),
        sup=torch.diagonal(a, -1).clone(),
        sub=torch.diagonal(a, 1).clone(),
        variant=variant,
    )


def build_from_sl2(spec: PotentialSpec) -> TridiagonalOperator:
    m, zeta, s = spec.m, spec.zeta, spec.sign
    g = sl2_generators(m)
    eye = torch.eye(m, dtype=torch.complex128)
    h = -4 * (g.j0 @ g.j0) - (2j * zeta) * g.jp + (s * 2j * zeta) * g.jm + (m ** 2 - s * zeta ** 2) * eye
    return _from_dense(h, spec.variant)


def boundary_leak(spec: PotentialSpec) -> complex:
    """ Coefficient of z^M in H_g z^{M-1}; zero by construction. """
    n = spec.m - 1
    return 2j * spec.zeta * (spec.m - 1 - n)


def operator_deviation(a: TridiagonalOperator, b: TridiagonalOperator) -> float:
    """ Largest element-wise difference between two operators of equal size. """
    assert a.dim == b.dim, f"Operator sizes differ: {a.dim} vs {b.dim}."
    return float((a.to_dense() - b.to_dense()).abs().max())


def characteristic_polynomial(op: TridiagonalOperator) -> EnergyPolynomial:
    """ det(E I - A) by the tridiagonal determinant recurrence, using only the bands of op. """
    diag = op.diag.tolist()
    products = op.off_diagonal_products.tolist()
    p_prev, p = np.zeros(1, dtype=np.complex128), np.ones(1, dtype=np.complex128)
    for n in range(op.dim):
        coupling = products[n - 1] if n else 0.
        p_prev, p = p, P.polysub(P.polysub(P.polymulx(p), diag[n] * p), coupling * p_prev)
    return EnergyPolynomial(np.asarray(p, dtype=np.complex128))


def char_poly_deviation(spec: PotentialSpec, op: Optional[TridiagonalOperator] = None, coeffs=None) -> float:
    """ Coefficient-wise distance between det(E I - A) and R_M, relative to the largest coefficient. """
    op = op if op is not None else build_operator(spec)
    det = characteristic_polynomial(op).coeffs
    r_m = build_R(spec, spec.m, coeffs)[spec.m].coeffs
    if len(det) != len(r_m):
        return float('inf')
    scale = max(np.abs(det).max(), np.abs(r_m).max())
    return float(np.abs(det - r_m).max() / scale)


def _similarity_scaling(op: TridiagonalOperator) -> torch.Tensor:
    # d_{n+1} / d_n = sup[n] / sqrt(a_{n+1}) turns both off-diagonals into sqrt(a_{n+1})
    root = torch.sqrt(op.off_diagonal_products.real).to(torch.complex128)
    ratios = op.sup / root
    ones = torch.ones(1, dtype=torch.complex128)
    return torch.cat([ones, torch.cumprod(ratios, dim=0)])


def symmetrize_minus(op: TridiagonalOperator) -> torch.Tensor:
    """ Real symmetric tridiagonal matrix similar to a minus-variant operator.

    For the minus family every product A[n+1][n] A[n][n+1] = 4(n+1)(M-1-n) zeta^2 is positive,
    so a diagonal similarity moves the factors of i into the basis and leaves sqrt of the
    products on both off-diagonals. The result is real symmetric, hence has a real spectrum.

    Raises:
        VariantMismatch: for plus-variant operators, whose products are negative
        ZetaZero: when the off-diagonal products vanish
    """
    if op.variant is not Variant.MINUS:
        raise VariantMismatch("Only minus-variant operators admit a real symmetrisation.")
    products = op.off_diagonal_products.real
    if op.dim > 1 and not bool(torch.all(products > 0)):
        raise ZetaZero("Symmetrisation needs zeta != 0.")
    s = torch.diag(op.diag.clone())
    if op.dim > 1:
        off = torch.sqrt(products)
        s = s + torch.diag(off, 1) + torch.diag(off, -1)
    return s


def eigen_spectrum(
        op: TridiagonalOperator,
        spec: PotentialSpec,
        cfg: Optional[NumericsCfg] = None,
        symmetrize: Optional[bool] = None,
) -> Spectrum:
    """ Full eigendecomposition of the gauged operator; eigenvectors are the phi coefficients.

    Args:
        op: operator built for spec
        spec: the potential op was built from
        cfg: numeric tolerances
        symmetrize: use the real symmetric path, defaults to True for the minus variant while its
            off-diagonal products are representable (positive)

    Raises:
        EigensolverFailure: if the dense solver fails or returns non-finite values
    """
    cfg = cfg or NumericsCfg()
    if op.variant is not spec.variant:
        raise VariantMismatch(f"Operator built for {op.variant.value}, spec is {spec.variant.value}.")
    assert op.dim == spec.m, f"Operator dimension {op.dim} does not match M={spec.m}."
    m = op.dim

    if spec.zeta == 0:
        energies = [complex(v) for v in op.diag.tolist()]
        vectors = [np.eye(m, dtype=np.complex128)[n] for n in range(m)]
        return assemble_spectrum(spec, energies, vectors, Method.MATRIX, cfg)

    use_symmetric = symmetrize
    if use_symmetric is None:
        # products of order zeta^2 underflow for tiny zeta, the general solver still sees the bands
        use_symmetric = op.variant is Variant.MINUS and bool(torch.all(op.off_diagonal_products.real > 0))
    try:
        if use_symmetric:
            evals, w = torch.linalg.eigh(symmetrize_minus(op))
            vecs = _similarity_scaling(op)[:, None] * w.to(torch.complex128)
            evals = evals.to(torch.complex128)
        else:
            evals, vecs = torch.linalg.eig(op.to_dense())
    except RuntimeError as e:
        raise EigensolverFailure(f"Dense eigensolver failed for {spec}: {e}") from e
    if not (torch.isfinite(evals).all() and torch.isfinite(vecs).all()):
        raise EigensolverFailure(f"Dense eigensolver returned non-finite values for {spec}.")

    energies = [complex(e) for e in evals.tolist()]
    vectors = [vecs[:, k].numpy() for k in range(m)]
    flags = None
    if not use_symmetric:
        energies, vectors, flags, groups = merge_coalesced(energies, vectors, cfg.degenerate_gap)
        for group in groups:
            logging.debug(f'Coalesced eigenpairs {group} at E = {energies[group[0]]} for {spec}.')
    logging.debug(f'Matrix route for {spec}: {"symmetric" if use_symmetric else "general"} solver.')
    return assemble_spectrum(spec, energies, vectors, Method.MATRIX, cfg, flags)


def operator_residual(op: TridiagonalOperator, energy: complex, coeffs) -> float:
    """ |(A - E) c| / (|A| |c|) with Frobenius and Euclidean norms. """
    a = op.to_dense()
    c = torch.as_tensor(coeffs, dtype=torch.complex128)
    r = a @ c - complex(energy) * c
    scale = max(1., float(torch.linalg.matrix_norm(a))) * float(torch.linalg.vector_norm(c))
    return float(torch.linalg.vector_norm(r)) / scale
