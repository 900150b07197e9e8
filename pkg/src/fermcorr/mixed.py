"""Mixed states on the antisymmetric space and the K=2 Slater measure.

Density matrices are ``d x d`` in the ``|ab>`` (a < b) basis of
:mod:`fermcorr.basis`.  For K=2 the Slater number one test and the
Slater correlation measure both come from the Takagi values of the
symmetric matrix ``C_ij = sum eps^{abcd} w^i_ab w^j_cd`` built from the
subnormalized eigenvectors of ``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import basis
from .linalg import LinAlgInputError, epsilon_contract, hermitian_eig, takagi_factorize
from .pure import StateError, TwoFermionState
from .sampling import SeedLike, ginibre, rng_from

EIG_THRESHOLD = 1e-10
NEGATIVE_EIG_TOL = 1e-8
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
MARGIN_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MixedState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateError(f"density matrix must be square, got shape {rho.shape}")
        basis.k_from_dim(rho.shape[0])
        scale = max(1.0, float(np.abs(rho).max(initial=0.0)))
        herm = float(np.abs(rho - rho.conj().T).max())
        if herm > HERMITIAN_TOL * scale:
            raise StateError(f"density matrix is not hermitian (deviation {herm:.3e})")
        rho = (rho + rho.conj().T) / 2
        low = float(np.linalg.eigvalsh(rho)[0])
        if low < -PSD_TOL * scale:
            raise StateError(f"density matrix is not positive semidefinite (min eigenvalue {low:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_pure(cls, s: TwoFermionState) -> "MixedState":
        v = s.vector
        return cls(np.outer(v, v.conj()))

    @classmethod
    def mixture(cls, terms) -> "MixedState":
        """``sum p |s><s|`` over ``(p, state)`` pairs; states are used as given."""
        return cls(sum(p * cls.from_pure(s).rho for p, s in terms))

    @property
    def k(self) -> int:
        return basis.k_from_dim(self.rho.shape[0])

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def normalize(self) -> "MixedState":
        return MixedState(self.rho / self.trace)

    def __repr__(self) -> str:
        return f"MixedState(k={self.k}, trace={self.trace:.6g})"


def maximally_mixed(k: int) -> MixedState:
    d = basis.dim(k)
    return MixedState(np.eye(d) / d)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvectors scaled so that ``<psi_i|psi_j> = lambda_i delta_ij``."""

    states: list[TwoFermionState]
    eigenvalues: np.ndarray

    @property
    def r(self) -> int:
        return len(self.states)

    @property
    def k(self) -> int:
        return self.states[0].k

    def reconstruct(self) -> np.ndarray:
        vecs = np.column_stack([s.vector for s in self.states])
        return vecs @ vecs.conj().T


def spectral_decompose(m: MixedState, eig_threshold: float = EIG_THRESHOLD) -> SpectralDecomposition:
    if eig_threshold < 0:
        raise ValueError("eig_threshold must be nonnegative")
    lam, vecs = hermitian_eig(m.rho)
    if lam[-1] < -NEGATIVE_EIG_TOL:
        raise StateError(f"invalid state: eigenvalue {lam[-1]:.3e} is negative")
    keep = lam > eig_threshold
    if not keep.any():
        raise StateError("state has no eigenvalue above the threshold")
    states = [TwoFermionState.from_vector(np.sqrt(l) * vecs[:, i], m.k)
              for i, l in enumerate(lam) if l > eig_threshold]
    return SpectralDecomposition(states=states, eigenvalues=lam[keep])


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """``c_matrix = u @ diag(c) @ u.T`` with ``c`` real, nonnegative, descending."""

    c_matrix: np.ndarray
    c: np.ndarray
    u: np.ndarray


def _require_k2(k: int, what: str) -> None:
    if k != 2:
        raise StateError(f"{what} is defined only for K=2, got K={k}")


def correlation_matrix(sd: SpectralDecomposition) -> CorrelationMatrix:
    _require_k2(sd.k, "the correlation matrix")
    ws = [s.w for s in sd.states]
    r = len(ws)
    c = np.empty((r, r), dtype=complex)
    for i in range(r):
        for j in range(i, r):
            c[i, j] = c[j, i] = epsilon_contract(ws[i], ws[j])
    tak = takagi_factorize(c)
    return CorrelationMatrix(c_matrix=c, c=tak.values, u=tak.u)


def _margin(c: np.ndarray) -> float:
    return float(np.sum(c[1:]) - c[0])


@dataclass(frozen=True)
class SlaterNumberVerdict:
    slater_number_one: bool
    margin: float


def has_slater_number_one(m: MixedState, tol: float = MARGIN_TOL) -> SlaterNumberVerdict:
    """Slater number one iff the largest Takagi value is at most the sum of the rest."""
    _require_k2(m.k, "the Slater number test")
    cm = correlation_matrix(spectral_decompose(m))
    margin = _margin(cm.c)
    return SlaterNumberVerdict(slater_number_one=margin >= -tol, margin=margin)


def slater_measure(m: MixedState) -> float:
    """Slater correlation measure, clamped at zero."""
    _require_k2(m.k, "the Slater measure")
    cm = correlation_matrix(spectral_decompose(m))
    return max(0.0, -_margin(cm.c))


# Sign columns: column i holds the signs of U_ki over the r' constituents.
_SIGN_COLUMNS = {
    1: ["+"],
    2: ["++", "+-"],
    4: ["++++", "++--", "+-+-", "+--+"],
    8: ["++++++++", "++++----", "++--++--", "++----++", "+-+-+-+-", "+-+--+-+"],
}


def constituent_count(r: int) -> int:
    if r == 1:
        return 1
    if r == 2:
        return 2
    if r <= 4:
        return 4
    if r <= 6:
        return 8
    raise StateError(f"rank {r} exceeds the K=2 space")


def sign_matrix(r: int) -> np.ndarray:
    cols = _SIGN_COLUMNS[constituent_count(r)][:r]
    return np.array([[1.0 if ch == "+" else -1.0 for ch in col] for col in cols]).T


def _triangle_phases(c: np.ndarray) -> np.ndarray:
    """Angles ``phi_i`` (``phi_0 = 0``) with ``|sum c_i exp(i phi_i)| = max(0, c_0 - sum_rest)``.

    When the largest value does not dominate, the rest are split greedily into
    two groups whose sums ``B``, ``C`` satisfy ``|B - C| <= c_0 <= B + C`` and
    the three lengths are closed into a triangle.
    """
    r = len(c)
    phi = np.zeros(r)
    if r == 1:
        return phi
    a = c[0]
    if a >= np.sum(c[1:]):
        phi[1:] = np.pi
        return phi
    groups = ([], [])
    sums = [0.0, 0.0]
    for i in range(1, r):
        g = 0 if sums[0] <= sums[1] else 1
        groups[g].append(i)
        sums[g] += c[i]
    b, cc = sums
    if b == 0:
        # then cc == a exactly
        beta, gamma = 0.0, np.pi
    else:
        cos_beta = np.clip((cc**2 - a**2 - b**2) / (2 * a * b), -1.0, 1.0)
        beta = float(np.arccos(cos_beta))
        gamma = float(np.angle(-(a + b * np.exp(1j * beta))))
    phi[groups[0]] = beta
    phi[groups[1]] = gamma
    return phi


def _phase_sum(c: np.ndarray, phi: np.ndarray) -> float:
    return float(abs(np.sum(c * np.exp(1j * phi))))


@dataclass(frozen=True, eq=False)
class DecompositionPlan:
    """Mixing coefficients of an optimal pure-state decomposition.

    ``u_ki = signs_ki exp(i theta_i) / sqrt(r')`` acts on the Takagi-rotated
    eigenvectors; ``mixing`` is the same map expressed on the spectral
    eigenvectors, so ``phi_k = sum_j mixing_kj psi_j``.
    """

    r_prime: int
    signs: np.ndarray
    thetas: np.ndarray
    u_ki: np.ndarray
    mixing: np.ndarray
    c: np.ndarray
    zeroed: bool = field(default=True)


def synthesize_optimal_decomposition(m: MixedState) -> tuple[DecompositionPlan, list[TwoFermionState]]:
    """Pure states ``phi_k`` with ``sum |phi_k><phi_k| = rho`` attaining the Slater measure.

    If the state has Slater number one every ``phi_k`` has Slater rank one.
    Otherwise each constituent carries the same share of the measure and
    ``zeroed`` is False.
    """
    _require_k2(m.k, "decomposition synthesis")
    sd = spectral_decompose(m)
    cm = correlation_matrix(sd)
    c = cm.c
    r = sd.r
    r_prime = constituent_count(r)
    signs = sign_matrix(r)
    phi = _triangle_phases(c)
    target = max(0.0, c[0] - np.sum(c[1:]))
    if abs(_phase_sum(c, phi) - target) > 1e-10 * max(1.0, c[0]):
        res = minimize(lambda p: abs(_phase_sum(c, np.concatenate([[0.0], p])) - target),
                       phi[1:], method="Nelder-Mead",
                       options={"xatol": 1e-14, "fatol": 1e-16, "maxiter": 20000})
        phi = np.concatenate([[0.0], res.x])
    thetas = phi / 2
    u_ki = signs * np.exp(1j * thetas) / np.sqrt(r_prime)
    # Rotated eigenvectors chi_i = sum_j conj(U_ji) psi_j diagonalize C.
    mixing = u_ki @ cm.u.conj().T
    ws = np.array([s.w for s in sd.states])
    states = [TwoFermionState(np.tensordot(row, ws, axes=1)) for row in mixing]
    plan = DecompositionPlan(r_prime=r_prime, signs=signs, thetas=thetas, u_ki=u_ki,
                             mixing=mixing, c=c, zeroed=bool(_margin(c) >= 0))
    return plan, states


def apply_local_bilateral_mixed(m: MixedState, ops) -> tuple[MixedState, float]:
    """``rho -> sum_j (A_j (x) A_j) rho (A_j (x) A_j)^H``, renormalized.

    Returns the unit-trace image and the trace before renormalization.
    """
    ops = [np.asarray(a, dtype=complex) for a in ops]
    if not ops:
        raise ValueError("operator list is empty")
    n = 2 * m.k
    out = np.zeros_like(m.rho)
    for a in ops:
        if a.shape != (n, n):
            raise LinAlgInputError(f"local operator must be {n}x{n}, got {a.shape}")
        big = basis.pair_operator(a)
        out = out + big @ m.rho @ big.conj().T
    t = float(np.trace(out).real)
    if t <= 0:
        raise StateError("local map annihilates the state")
    return MixedState(out / t), t


def apply_single_particle_unitary_mixed(m: MixedState, u) -> MixedState:
    big = basis.pair_operator(np.asarray(u, dtype=complex))
    return MixedState(big @ m.rho @ big.conj().T)


def random_mixed_state(k: int, rank: int, seed: SeedLike = None) -> MixedState:
    """Unit-trace ``G G^H`` for a complex Gaussian ``d x rank`` matrix ``G``."""
    d = basis.dim(k)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must be in 1..{d} for K={k}")
    g = ginibre(rng_from(seed), d, rank)
    rho = g @ g.conj().T
    return MixedState(rho / np.trace(rho).real)
