"""Coordinates on the antisymmetric two-particle space.

Modes are 0-based internally.  The orthonormal basis of the antisymmetric
space is ``|ab> = f_a^+ f_b^+ |0>`` for ``a < b`` in lexicographic order,
and a coefficient matrix ``w`` has amplitudes ``2 w_ab`` in that basis.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def pairs(k: int) -> tuple[tuple[int, int], ...]:
    n = 2 * k
    return tuple((a, b) for a in range(n) for b in range(a + 1, n))


def dim(k: int) -> int:
    """Dimension ``K(2K-1)`` of the antisymmetric space."""
    return k * (2 * k - 1)


def k_from_dim(d: int) -> int:
    k = int(round((1 + np.sqrt(1 + 8 * d)) / 4))
    if k < 1 or dim(k) != d:
        raise ValueError(f"{d} is not the dimension of an antisymmetric two-fermion space")
    return k


@lru_cache(maxsize=None)
def _upper_indices(k: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(2 * k, 1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def to_vector(w: np.ndarray) -> np.ndarray:
    """Amplitude vector ``2 w_ab`` (a < b) of a coefficient matrix."""
    rows, cols = _upper_indices(w.shape[0] // 2)
    return 2 * w[rows, cols]


def from_vector(v, k: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (dim(k),):
        raise ValueError(f"expected a vector of length {dim(k)}, got shape {v.shape}")
    rows, cols = _upper_indices(k)
    w = np.zeros((2 * k, 2 * k), dtype=complex)
    w[rows, cols] = v / 2
    w[cols, rows] = -v / 2
    return w


def pair_operator(a: np.ndarray) -> np.ndarray:
    """Matrix of ``A (x) A`` restricted to the antisymmetric space.

    Entry ``[(ab), (cd)] = A_ac A_bd - A_ad A_bc``; it maps the amplitudes of
    ``w`` to those of ``A w A^T``.
    """
    a = np.asarray(a, dtype=complex)
    rows, cols = _upper_indices(a.shape[0] // 2)
    return (a[np.ix_(rows, rows)] * a[np.ix_(cols, cols)]
            - a[np.ix_(rows, cols)] * a[np.ix_(cols, rows)])


@lru_cache(maxsize=None)
def _embedding(k: int) -> np.ndarray:
    n = 2 * k
    out = np.zeros((n * n, dim(k)))
    s = 1 / np.sqrt(2)
    for i, (a, b) in enumerate(pairs(k)):
        out[a * n + b, i] = s
        out[b * n + a, i] = -s
    out.setflags(write=False)
    return out


def embedding(k: int) -> np.ndarray:
    """Isometry from the antisymmetric space into ``C^2K (x) C^2K``."""
    return _embedding(k)


def embed_operator(x: np.ndarray, symmetric_fill: float = 0.0) -> np.ndarray:
    """Lift an operator on the antisymmetric space to the full tensor space.

    The result is ``J x J^H + symmetric_fill * P_sym``; with the default fill
    it vanishes on the symmetric subspace.
    """
    j = embedding(k_from_dim(x.shape[0]))
    full = j @ x @ j.T
    if symmetric_fill:
        full = full + symmetric_fill * (np.eye(j.shape[0]) - j @ j.T)
    return full
