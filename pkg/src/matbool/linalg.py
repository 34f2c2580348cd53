"""Small dense complex matrices with tolerance-aware equality.

Coefficients of matrix-valued expressions live here as 2-D complex
numpy arrays; a 1x1 array doubles as a complex scalar. Everything is
immutable by convention (arrays are created with writeable=False).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

DEFAULT_EPS = 1e-9


@dataclass(frozen=True)
class Tolerance:
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("tolerance must be non-negative")


def _eps(tol) -> float:
    if isinstance(tol, Tolerance):
        return tol.eps
    return float(tol)


def as_matrix(value) -> np.ndarray:
    """Coerce scalars / nested lists / arrays to an immutable 2-D complex array."""
    a = np.asarray(value, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise DimensionError(f"expected at most 2 dimensions, got {a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError("matrices must have at least one row and column")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix entries must be finite")
    a = a.copy()
    a.flags.writeable = False
    return a


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise DimensionError(f"add: shape mismatch {a.shape} vs {b.shape}")
    return _freeze(a + b)


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product; a 1x1 operand multiplies entrywise as a scalar."""
    if a.shape == (1, 1) and b.shape != (1, 1):
        return _freeze(a[0, 0] * b)
    if b.shape == (1, 1) and a.shape != (1, 1):
        return _freeze(b[0, 0] * a)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"mul: inner dimensions {a.shape} x {b.shape}")
    return _freeze(a @ b)


def scale(c, a: np.ndarray) -> np.ndarray:
    return _freeze(complex(c) * a)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _freeze(np.kron(a, b))


def dagger(a: np.ndarray) -> np.ndarray:
    return _freeze(a.conj().T.copy())


def identity(n: int) -> np.ndarray:
    return _freeze(np.eye(n, dtype=complex))


def zeros(m: int, k: int) -> np.ndarray:
    return _freeze(np.zeros((m, k), dtype=complex))


def approx_eq(a: np.ndarray, b: np.ndarray, tol=DEFAULT_EPS) -> bool:
    """True if the max entrywise modulus difference is within tolerance."""
    if a.shape != b.shape:
        raise DimensionError(f"approx_eq: shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) <= _eps(tol)


def is_zero(a: np.ndarray, tol=DEFAULT_EPS) -> bool:
    return float(np.max(np.abs(a))) <= _eps(tol)


def canonical_key(a: np.ndarray, tol=DEFAULT_EPS):
    """Hashable grid key; matrices within eps land in the same or an
    adjacent cell, so clustering must probe neighbours and confirm with
    approx_eq rather than trusting raw key equality."""
    eps = _eps(tol)
    if eps == 0:
        return (a.shape, tuple(a.ravel().tolist()))
    q = np.round(a.view(float) / eps).astype(np.int64)
    return (a.shape, tuple(q.ravel().tolist()))


def is_unitary(a: np.ndarray, tol=DEFAULT_EPS) -> bool:
    if a.shape[0] != a.shape[1]:
        raise DimensionError("is_unitary: matrix must be square")
    return approx_eq(dagger(a) @ a, np.eye(a.shape[0], dtype=complex), tol)


def cluster(mats: list[np.ndarray], tol=DEFAULT_EPS) -> list[int]:
    """Cluster labels for a list of same-shaped matrices.

    Clusters are connected components of the "within eps" relation.
    Candidate pairs come from canonical_key buckets (with neighbouring
    cells probed via each element's own key and confirmation by
    approx_eq); small inputs just take all pairs, which can never miss.
    """
    n = len(mats)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    eps = _eps(tol)
    if n <= 256:
        for i in range(n):
            for j in range(i + 1, n):
                if mats[i].shape == mats[j].shape and approx_eq(mats[i], mats[j], eps):
                    union(i, j)
    else:
        buckets: dict = {}
        for i, a in enumerate(mats):
            key = canonical_key(a, eps)
            buckets.setdefault(key, []).append(i)
        # probe own cell plus neighbouring cells reachable within one step
        for i, a in enumerate(mats):
            shape, cells = canonical_key(a, eps)
            for delta in _neighbour_deltas(len(cells)):
                probe = (shape, tuple(c + d for c, d in zip(cells, delta)))
                for j in buckets.get(probe, ()):
                    if j > i and approx_eq(mats[i], mats[j], eps):
                        union(i, j)
        # fall back is unnecessary: |x-y| <= eps implies per-component
        # grid cells differ by at most one
    labels = [0] * n
    reps: dict[int, int] = {}
    for i in range(n):
        root = find(i)
        if root not in reps:
            reps[root] = len(reps)
        labels[i] = reps[root]
    return labels


def _neighbour_deltas(width: int):
    if width > 8:  # large matrices go through the pairwise path anyway
        yield (0,) * width
        return
    import itertools

    yield from itertools.product((-1, 0, 1), repeat=width)
