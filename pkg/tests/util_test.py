import math

import numpy as np

from qes_spectra import PotentialSpec, multiset_deviation


def spec(variant, zeta, m):
    return PotentialSpec(variant=variant, zeta=zeta, m=m)


def assert_multiset_close(actual, expected, atol=1e-9):
    """ Compare two spectra as multisets, order independent. """
    actual = [complex(e) for e in actual]
    expected = [complex(e) for e in expected]
    deviation = multiset_deviation(actual, expected)
    assert deviation <= atol, f"spectra differ by {deviation:.3e}: {actual} vs {expected}"


def minus_m4_energies(zeta):
    out = []
    for sigma in (1, -1):
        rho = math.sqrt(1 - sigma * zeta + zeta ** 2)
        for tau in (1, -1):
            out.append(11 - 2 * sigma * zeta + zeta ** 2 + 4 * tau * rho)
    return out


def random_coeffs(m, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=m) + 1j * rng.normal(size=m)
