import math
from typing import List, Sequence, Tuple, Union

import numpy as np
import torch

from .constants import DEGENERATE_COS, RESIDUAL_HALF_WIDTH, RESIDUAL_SAMPLES

ComplexLike = Union[complex, float, int, torch.Tensor]


def to_complex_tensor(x: ComplexLike) -> Tuple[torch.Tensor, bool]:
    """ Coerce a scalar or tensor to complex128, remembering whether the input was a scalar. """
    if isinstance(x, torch.Tensor):
        return x.to(torch.complex128), False
    return torch.tensor(complex(x), dtype=torch.complex128), True


def from_complex_tensor(t: torch.Tensor, scalar: bool) -> ComplexLike:
    return complex(t.item()) if scalar else t


def chebyshev_samples(n: int = RESIDUAL_SAMPLES, half_width: float = RESIDUAL_HALF_WIDTH) -> torch.Tensor:
    """ Chebyshev nodes of the first kind on [-half_width, half_width], ascending. """
    assert n >= 1, f"Need at least one sample, got {n}."
    k = torch.arange(n, dtype=torch.float64)
    nodes = -half_width * torch.cos((2 * k + 1) * math.pi / (2 * n))
    return nodes


def greedy_pairing(reference: Sequence[complex], candidates: Sequence[complex]) -> List[int]:
    """ Pair every reference value with a distinct candidate, closest pairs first.

    Returns:
        list where entry i is the candidate index assigned to reference[i]
    """
    assert len(reference) == len(candidates), \
        f"Cannot pair {len(reference)} values with {len(candidates)} candidates."
    ref = np.asarray(reference, dtype=np.complex128)
    cand = np.asarray(candidates, dtype=np.complex128)
    dist = np.abs(ref[:, None] - cand[None, :])
    # stable sort keeps ties in index order so the pairing is deterministic
    order = np.argsort(dist, axis=None, kind='stable')
    assigned = [-1] * len(ref)
    used = set()
    for flat in order:
        i, j = divmod(int(flat), len(cand))
        if assigned[i] >= 0 or j in used:
            continue
        assigned[i] = j
        used.add(j)
        if len(used) == len(cand):
            break
    return assigned


def multiset_deviation(a: Sequence[complex], b: Sequence[complex]) -> float:
    """ Largest distance between two equal-size multisets under greedy nearest pairing. """
    if len(a) != len(b):
        raise ValueError(f"Multisets differ in size: {len(a)} vs {len(b)}.")
    if not len(a):
        return 0.
    pairing = greedy_pairing(a, b)
    return max(abs(complex(a[i]) - complex(b[j])) for i, j in enumerate(pairing))


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.
    return float(abs(np.vdot(u, v)) / (nu * nv))


def merge_coalesced(
        energies: Sequence[complex],
        vectors: Sequence[Sequence[complex]],
        gap: float,
        cos_tol: float = DEGENERATE_COS,
):
    """ Collapse eigenpairs that have coalesced at an exceptional point.

    Two pairs are merged when their energies lie within gap * max(1, |E|) of each other and their
    coefficient vectors are parallel. Eigenvalues that are merely close but carry independent
    vectors are left alone.

    Returns:
        (energies, vectors, degenerate flags, groups) with groups a list of index lists of size > 1
    """
    n = len(energies)
    vals = [complex(e) for e in energies]
    vecs = [np.asarray(v, dtype=np.complex128) for v in vectors]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1., abs(vals[i]), abs(vals[j]))
            if abs(vals[i] - vals[j]) <= gap * scale and _cosine(vecs[i], vecs[j]) >= cos_tol:
                parent[find(j)] = find(i)

    members = {}
    for i in range(n):
        members.setdefault(find(i), []).append(i)
    groups = [g for g in members.values() if len(g) > 1]

    flags = [False] * n
    for group in groups:
        mean = sum(vals[i] for i in group) / len(group)
        for i in group:
            vals[i] = mean
            vecs[i] = vecs[group[0]]
            flags[i] = True
    return vals, [tuple(complex(c) for c in v) for v in vecs], flags, groups


def to_sample_tensor(xs, dtype: torch.dtype = torch.complex128) -> torch.Tensor:
    """ Coerce a sequence or tensor of sample points to a 1-d tensor of the given dtype. """
    if isinstance(xs, torch.Tensor):
        t = xs.to(dtype).reshape(-1)
    else:
        t = torch.tensor([complex(x) if dtype.is_complex else float(x) for x in xs], dtype=dtype)
    if not t.numel():
        raise ValueError("Sample set must not be empty.")
    return t
