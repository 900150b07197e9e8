import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cgauss
from fermcorr import basis
from fermcorr.linalg import LinAlgInputError, pfaffian4
from fermcorr.oracles import eta_bruteforce, rank_oracle
from fermcorr.pure import (
    StateError,
    TwoFermionState,
    apply_local_bilateral_pure,
    apply_single_particle_unitary,
    determinant,
    dual_overlap,
    dual_state,
    eta,
    eta_weight,
    maximally_correlated,
    particle_hole_dual,
    slater_decompose,
    slater_rank,
    wedge,
)
from fermcorr.sampling import random_pure_state, random_special_unitary, random_unitary


def theta_state(theta):
    return TwoFermionState(np.cos(theta) * determinant(2, 0, 1).w + np.sin(theta) * determinant(2, 2, 3).w)


def orthonormal_pair(rng, n):
    q = np.linalg.qr(cgauss(rng, n, 2))[0]
    return q[:, 0], q[:, 1]


class TestState:
    def test_determinant_normalized(self):
        s = determinant(2, 0, 1)
        assert s.normalized and s.w[0, 1] == 0.5

    def test_vector_view(self):
        assert np.allclose(determinant(2, 0, 1).vector, [1, 0, 0, 0, 0, 0])

    def test_odd_dimension_rejected(self):
        with pytest.raises(StateError):
            TwoFermionState(np.zeros((3, 3)))

    def test_normalize(self, rng):
        s = TwoFermionState(basis.from_vector(cgauss(rng, 6), 2))
        assert s.normalize().normalized

    def test_zero_cannot_normalize(self):
        with pytest.raises(StateError):
            TwoFermionState(np.zeros((4, 4))).normalize()

    def test_immutable(self):
        with pytest.raises(ValueError):
            determinant(2, 0, 1).w[0, 1] = 1

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_maximally_correlated(self, k):
        s = maximally_correlated(k)
        assert s.normalized
        spectrum = slater_decompose(s)
        assert spectrum.rank == k
        assert np.allclose(spectrum.z, 1 / (2 * np.sqrt(k)))


class TestSlaterDecompose:
    def test_determinant(self):
        spectrum = slater_decompose(determinant(2, 0, 1))
        assert spectrum.rank == 1 and spectrum.z[0] == pytest.approx(0.5)

    def test_maximally_correlated_k2(self):
        spectrum = slater_decompose(maximally_correlated(2))
        assert spectrum.rank == 2
        assert np.allclose(spectrum.z, 1 / (2 * np.sqrt(2)))

    def test_theta_state(self):
        t = np.pi / 8
        spectrum = slater_decompose(theta_state(t))
        assert spectrum.rank == 2
        assert np.allclose(spectrum.z, [np.cos(t) / 2, np.sin(t) / 2], atol=1e-14)

    def test_basis_brings_block_form(self, rng):
        s = random_pure_state(3, rng)
        spectrum = slater_decompose(s)
        z = spectrum.basis.conj().T @ s.w @ spectrum.basis.conj()
        expect = np.zeros((6, 6))
        for i, zi in enumerate(spectrum.z):
            expect[2 * i, 2 * i + 1], expect[2 * i + 1, 2 * i] = zi, -zi
        assert np.abs(z - expect).max() < 1e-10

    def test_norm_bookkeeping(self, rng):
        for k in (2, 3, 4):
            s = TwoFermionState(2.3 * random_pure_state(k, rng).w)
            assert np.sum(4 * slater_decompose(s).z ** 2) == pytest.approx(s.norm2, rel=1e-10)

    def test_wedge_rank_one(self, rng):
        for k in (2, 3, 4):
            e, f = orthonormal_pair(rng, 2 * k)
            assert slater_rank(wedge(e, f)) == 1

    def test_rank_against_oracle(self, rng):
        for i in range(40):
            k = 2 + i % 2
            s = random_pure_state(k, rng, rank=1 + i % k)
            assert slater_rank(s) == rank_oracle(s, seed=i).rank == 1 + i % k

    def test_unitary_fingerprint(self, rng):
        s = random_pure_state(3, rng)
        t = apply_single_particle_unitary(s, random_unitary(6, rng))
        assert np.allclose(slater_decompose(s).z, slater_decompose(t).z, atol=1e-9)
        assert slater_rank(s) == slater_rank(t)


class TestEta:
    def test_determinant(self):
        assert eta(determinant(2, 1, 3)) == 0

    def test_maximally_correlated(self):
        assert eta(maximally_correlated(2)) == pytest.approx(eta_bruteforce(maximally_correlated(2)), abs=1e-15)
        assert eta(maximally_correlated(2)) == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("theta", np.linspace(0, np.pi, 13))
    def test_theta_family(self, theta):
        s = theta_state(theta)
        assert eta(s) == pytest.approx(abs(np.sin(2 * theta)), abs=1e-12)
        assert eta(s) == pytest.approx(eta_bruteforce(s), abs=1e-12)

    def test_matches_bruteforce(self, rng):
        for _ in range(200):
            s = random_pure_state(2, rng)
            assert abs(eta(s) - eta_bruteforce(s)) < 1e-12

    def test_range_and_rank_criterion(self, rng):
        for _ in range(200):
            s = random_pure_state(2, rng)
            assert 0 <= eta(s) <= 1 + 1e-12
            assert eta(random_pure_state(2, rng, rank=1)) < 1e-12

    def test_det_identity(self, rng):
        for _ in range(200):
            w = random_pure_state(2, rng).w
            assert abs(abs(8 * pfaffian4(w)) ** 2 - 64 * abs(np.linalg.det(w))) < 1e-10

    def test_rejects_unnormalized(self):
        with pytest.raises(StateError):
            eta(TwoFermionState(2 * determinant(2, 0, 1).w))

    def test_rejects_k3(self):
        with pytest.raises(StateError):
            eta(maximally_correlated(3))

    def test_weight_scales(self, rng):
        s = random_pure_state(2, rng)
        assert eta_weight(TwoFermionState(np.sqrt(0.3) * s.w)) == pytest.approx(0.3 * eta(s))

    @given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
    def test_unitary_invariance_property(self, a, b):
        rng = np.random.default_rng(int(1e6 * a) % 2**32)
        s = random_pure_state(2, rng)
        u = random_unitary(4, rng) * np.exp(1j * b)
        assert abs(eta(apply_single_particle_unitary(s, u)) - eta(s)) < 1e-10


class TestDual:
    def test_determinant_maps_to_complement(self):
        d = dual_state(determinant(2, 0, 1))
        assert np.allclose(d.w, determinant(2, 2, 3).w)

    def test_maximally_correlated_self_dual(self):
        s = maximally_correlated(2)
        assert np.allclose(dual_state(s).w, s.w)

    def test_involution(self, rng):
        for _ in range(100):
            s = random_pure_state(2, rng)
            assert np.abs(dual_state(dual_state(s)).w - s.w).max() < 1e-12

    def test_particle_hole_route(self, rng):
        assert np.allclose(particle_hole_dual(determinant(2, 0, 1)).w, determinant(2, 2, 3).w)
        for _ in range(100):
            s = random_pure_state(2, rng)
            assert np.abs(particle_hole_dual(s).w - dual_state(s).w).max() < 1e-12

    def test_overlap_is_contraction(self, rng):
        s1, s2 = random_pure_state(2, rng), random_pure_state(2, rng)
        from fermcorr.linalg import epsilon_contract
        assert abs(dual_overlap(s1, s2) - epsilon_contract(s1.w, s2.w)) < 1e-12
        assert abs(dual_overlap(s1, s1)) == pytest.approx(eta(s1))

    def test_commutes_with_special_unitaries(self, rng):
        for _ in range(50):
            s = random_pure_state(2, rng)
            u = random_special_unitary(4, rng)
            lhs = particle_hole_dual(apply_single_particle_unitary(s, u))
            rhs = apply_single_particle_unitary(particle_hole_dual(s), u)
            assert np.abs(lhs.w - rhs.w).max() < 1e-10

    def test_phase_law_for_general_unitaries(self, rng):
        # D(U s) = conj(det U) U D(s); commutation holds up to this phase
        for _ in range(50):
            s = random_pure_state(2, rng)
            u = random_unitary(4, rng)
            lhs = dual_state(apply_single_particle_unitary(s, u))
            rhs = apply_single_particle_unitary(dual_state(s), u)
            assert np.abs(lhs.w - np.conj(np.linalg.det(u)) * rhs.w).max() < 1e-10

    def test_scalar_product_law(self, rng):
        for _ in range(50):
            s1, s2 = random_pure_state(2, rng), random_pure_state(2, rng)
            u = random_unitary(4, rng)
            t1 = apply_single_particle_unitary(s1, u)
            t2 = apply_single_particle_unitary(s2, u)
            assert abs(dual_overlap(t1, t2) - np.linalg.det(u) * dual_overlap(s1, s2)) < 1e-10

    def test_rejects_k3(self):
        with pytest.raises(StateError):
            dual_state(maximally_correlated(3))
        with pytest.raises(StateError):
            particle_hole_dual(maximally_correlated(3))


class TestTransformations:
    def test_identity(self, rng):
        s = random_pure_state(2, rng)
        assert np.array_equal(apply_single_particle_unitary(s, np.eye(4)).w, s.w)
        assert np.array_equal(apply_local_bilateral_pure(s, np.eye(4)).w, s.w)

    def test_unitary_preserves_norm(self, rng):
        s = random_pure_state(3, rng)
        assert apply_single_particle_unitary(s, random_unitary(6, rng)).norm2 == pytest.approx(1)

    def test_rejects_nonunitary(self, rng):
        with pytest.raises(LinAlgInputError):
            apply_single_particle_unitary(random_pure_state(2, rng), 2 * np.eye(4))

    def test_local_scaling(self):
        lam = 0.3
        s = apply_local_bilateral_pure(maximally_correlated(2), np.diag([lam, 1, 1, 1]))
        assert eta_weight(s) == pytest.approx(lam * eta(maximally_correlated(2)))

    def test_pfaffian_det_law(self, rng):
        for _ in range(100):
            s = random_pure_state(2, rng)
            a = cgauss(rng, 4, 4)
            t = apply_local_bilateral_pure(s, a)
            assert abs(pfaffian4(t.w) - np.linalg.det(a) * pfaffian4(s.w)) < 1e-10 * max(1, abs(np.linalg.det(a)))

    def test_singular_warns(self, rng):
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            apply_local_bilateral_pure(random_pure_state(2, rng), np.diag([0, 1, 1, 1]))
        assert any(issubclass(r.category, RuntimeWarning) for r in rec)
