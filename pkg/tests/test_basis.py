import numpy as np
import pytest

from conftest import cgauss, rand_antisym
from fermcorr import basis


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_dim_roundtrip(k):
    d = basis.dim(k)
    assert d == len(basis.pairs(k)) == k * (2 * k - 1)
    assert basis.k_from_dim(d) == k


def test_k_from_bad_dim():
    with pytest.raises(ValueError):
        basis.k_from_dim(5)


def test_vector_roundtrip(rng):
    w = rand_antisym(rng, 6)
    assert np.allclose(basis.from_vector(basis.to_vector(w), 3), w)


def test_vector_norm_convention(rng):
    w = rand_antisym(rng, 6)
    v = basis.to_vector(w)
    assert np.vdot(v, v).real == pytest.approx(2 * np.vdot(w, w).real)


def test_pair_operator_maps_amplitudes(rng):
    a = cgauss(rng, 6, 6)
    w = rand_antisym(rng, 6)
    assert np.allclose(basis.pair_operator(a) @ basis.to_vector(w), basis.to_vector(a @ w @ a.T))


def test_pair_operator_is_multiplicative(rng):
    a, b = cgauss(rng, 4, 4), cgauss(rng, 4, 4)
    assert np.allclose(basis.pair_operator(a @ b), basis.pair_operator(a) @ basis.pair_operator(b))


@pytest.mark.parametrize("k", [2, 3])
def test_embedding_is_isometry_onto_antisymmetric(k):
    j = basis.embedding(k)
    n = 2 * k
    assert np.allclose(j.T @ j, np.eye(basis.dim(k)))
    swap = np.eye(n * n).reshape(n, n, n, n).transpose(0, 1, 3, 2).reshape(n * n, n * n)
    assert np.allclose(j @ j.T, (np.eye(n * n) - swap) / 2)


def test_embedding_matches_pair_operator(rng):
    # on the antisymmetric subspace, A (x) A acts like the pair operator
    a = cgauss(rng, 4, 4)
    j = basis.embedding(2)
    assert np.allclose(j.T @ np.kron(a, a) @ j, basis.pair_operator(a))


def test_embed_operator_fill():
    x = np.eye(6)
    assert np.allclose(basis.embed_operator(x, 1.0), np.eye(16))
    assert np.linalg.matrix_rank(basis.embed_operator(x)) == 6
