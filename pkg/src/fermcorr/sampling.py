"""Seeded random generators for unitaries and two-fermion states."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from . import basis
from .linalg import block_form
from .pure import TwoFermionState

SeedLike = int | np.random.Generator | None


def rng_from(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(n: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-random ``n x n`` unitary."""
    if n == 1:
        return np.exp(2j * np.pi * rng_from(seed).random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng_from(seed))


def random_special_unitary(n: int, seed: SeedLike = None) -> np.ndarray:
    u = random_unitary(n, seed)
    return u / np.linalg.det(u) ** (1 / n)


def random_antisymmetric(n: int, seed: SeedLike = None) -> np.ndarray:
    g = ginibre(rng_from(seed), n, n)
    return (g - g.T) / 2


def random_pure_state(k: int, seed: SeedLike = None, rank: int | None = None) -> TwoFermionState:
    """Normalized random state; with ``rank`` given, of exactly that Slater rank."""
    rng = rng_from(seed)
    if rank is None:
        v = ginibre(rng, basis.dim(k))
        return TwoFermionState.from_vector(v / np.linalg.norm(v), k)
    if not 1 <= rank <= k:
        raise ValueError(f"Slater rank must be in 1..{k}")
    z = rng.uniform(0.1, 1.0, size=rank)
    z /= 2 * np.sqrt(np.sum(z**2))
    u = random_unitary(2 * k, rng)
    return TwoFermionState(u @ block_form(z, 2 * k) @ u.T)


def random_determinant(k: int, seed: SeedLike = None) -> TwoFermionState:
    return random_pure_state(k, seed, rank=1)


def random_product_density(n: int, seed: SeedLike = None) -> np.ndarray:
    """``|x><x| (x) |y><y|`` on ``C^n (x) C^n`` for random unit ``x``, ``y``."""
    rng = rng_from(seed)
    x = ginibre(rng, n)
    y = ginibre(rng, n)
    xy = np.kron(x / np.linalg.norm(x), y / np.linalg.norm(y))
    return np.outer(xy, xy.conj())


def random_separable_density(n: int, terms: int, seed: SeedLike = None) -> np.ndarray:
    """Random convex mixture of ``terms`` product states on ``C^n (x) C^n``."""
    rng = rng_from(seed)
    p = rng.dirichlet(np.ones(terms))
    return sum(pi * random_product_density(n, rng) for pi in p)
