from .version import __version__

from .closed_form import ClosedFormCase, ClosedFormPsi, closed_form_case, closed_form_energies, closed_form_psi, \
    m4_factors, m4_quartic, m4_quartic_residual, m4_quartic_scale
from .errors import QesError, NonConvergence, EigensolverFailure, RouteDisagreement, ZetaZero, NotAnEigenvalue, \
    VariantMismatch, UnsupportedM, DomainError
from .factory import list_presets, add_preset_config, get_preset_config, get_sweep_config, create_spec, \
    create_numerics_cfg
from .gauge_matrix import TridiagonalOperator, Sl2Generators, sl2_generators, build_operator, build_from_sl2, \
    boundary_leak, operator_deviation, characteristic_polynomial, char_poly_deviation, symmetrize_minus, \
    eigen_spectrum, operator_residual
from .model import Variant, Reality, Method, Transform, NumericsCfg, PotentialSpec, QesLevel, Spectrum, classify, \
    normalize_phi, assemble_spectrum, eval_potential, eval_potential_joint, default_transform, check_symmetry
from .recursion import RecursionCoeffs, EnergyPolynomial, recursion_coeffs, build_R, eval_R, aberth_roots, \
    phi_from_R, qes_energies_recursion, factorization_check
from .utils import chebyshev_samples, greedy_pairing, multiset_deviation
from .wavefunction import GaugeWavefunction, PtStatus, PtCheck, from_level, gauge_factor, eval_psi, \
    pointwise_residual, ode_residual, psi_pt_check, gauge_consistency
