"""Pure two-fermion states and their Slater structure.

A state ``|psi> = sum_ab w_ab f_a^+ f_b^+ |0>`` is stored through its
antisymmetric coefficient matrix ``w``.  With this convention
``<psi|psi> = 2 Tr(w^H w)``; the maximally correlated K=2 state then has
``eta = 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import basis
from .linalg import (
    DEFAULT_RANK_TOL,
    LEVI_CIVITA4,
    LinAlgInputError,
    antisymmetric,
    pfaffian4,
    youla_decompose,
)

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10


class StateError(ValueError):
    """A state does not satisfy the requirements of an operation."""


@dataclass(frozen=True, eq=False)
class TwoFermionState:
    w: np.ndarray

    def __post_init__(self):
        w = antisymmetric(self.w)
        if w.shape[0] % 2 or w.shape[0] == 0:
            raise StateError(f"single-particle dimension must be even and positive, got {w.shape[0]}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_vector(cls, v, k: int) -> "TwoFermionState":
        return cls(basis.from_vector(v, k))

    @property
    def k(self) -> int:
        return self.w.shape[0] // 2

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes on ``f_a^+ f_b^+ |0>``, ``a < b``."""
        return basis.to_vector(self.w)

    @property
    def norm2(self) -> float:
        return float(2 * np.vdot(self.w, self.w).real)

    @property
    def normalized(self) -> bool:
        return abs(self.norm2 - 1) <= NORM_TOL

    def normalize(self) -> "TwoFermionState":
        n2 = self.norm2
        if n2 == 0:
            raise StateError("cannot normalize the zero state")
        return TwoFermionState(self.w / np.sqrt(n2))

    def __repr__(self) -> str:
        return f"TwoFermionState(k={self.k}, norm2={self.norm2:.6g})"


def determinant(k: int, a: int, b: int) -> TwoFermionState:
    """Normalized ``f_a^+ f_b^+ |0>`` (0-based modes)."""
    w = np.zeros((2 * k, 2 * k), dtype=complex)
    w[a, b] = 0.5
    w[b, a] = -0.5
    return TwoFermionState(w)


def wedge(u, v) -> TwoFermionState:
    """Unnormalized ``g_u^+ g_v^+ |0>`` for single-particle vectors ``u``, ``v``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return TwoFermionState((np.outer(u, v) - np.outer(v, u)) / 2)


def maximally_correlated(k: int) -> TwoFermionState:
    """``K^{-1/2} sum_i f_{2i}^+ f_{2i+1}^+ |0>`` in the standard pairing."""
    if k < 1:
        raise StateError("k must be at least 1")
    w = np.zeros((2 * k, 2 * k), dtype=complex)
    c = 1 / (2 * np.sqrt(k))
    for i in range(k):
        w[2 * i, 2 * i + 1] = c
        w[2 * i + 1, 2 * i] = -c
    return TwoFermionState(w)


@dataclass(frozen=True, eq=False)
class SlaterSpectrum:
    """Slater coefficients ``z`` and the basis in which ``w`` is block diagonal.

    ``basis^H w conj(basis)`` is the canonical block matrix.
    """

    z: np.ndarray
    basis: np.ndarray
    rank: int


def slater_decompose(s: TwoFermionState, tol: float = DEFAULT_RANK_TOL) -> SlaterSpectrum:
    dec = youla_decompose(s.w, tol=tol)
    return SlaterSpectrum(z=dec.z, basis=dec.u, rank=dec.block_count)


def slater_rank(s: TwoFermionState, tol: float = DEFAULT_RANK_TOL) -> int:
    return slater_decompose(s, tol).rank


def _require_k2(s: TwoFermionState, what: str) -> None:
    if s.k != 2:
        raise StateError(f"{what} is defined only for K=2 (single-particle dimension 4), got K={s.k}")


def dual_state(s: TwoFermionState) -> TwoFermionState:
    """Dual matrix ``w~_ab = 1/2 sum_cd eps^{abcd} conj(w_cd)``."""
    _require_k2(s, "the dual state")
    return TwoFermionState(0.5 * np.einsum("abcd,cd->ab", LEVI_CIVITA4, s.w.conj()))


def dual_overlap(s1: TwoFermionState, s2: TwoFermionState) -> complex:
    """``<dual(s1)|s2>``, equal to ``sum eps^{abcd} w1_ab w2_cd``."""
    return complex(np.vdot(dual_state(s1).vector, s2.vector))


def eta_weight(s: TwoFermionState) -> float:
    """``8 |Pf(w)|`` for a possibly unnormalized K=2 state.

    For ``s = sqrt(p) * s_bar`` this is ``p * eta(s_bar)``.
    """
    _require_k2(s, "eta")
    return 8 * abs(pfaffian4(s.w))


def eta(s: TwoFermionState) -> float:
    """Slater correlation measure of a normalized K=2 state, in ``[0, 1]``."""
    _require_k2(s, "eta")
    if not s.normalized:
        raise StateError(f"eta needs a normalized state (norm^2 = {s.norm2:.12g}); normalize first")
    return eta_weight(s)


def _check_unitary(u, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (n, n):
        raise LinAlgInputError(f"single-particle operator must be {n}x{n}, got {u.shape}")
    err = float(np.abs(u @ u.conj().T - np.eye(n)).max())
    if err > UNITARY_TOL:
        raise LinAlgInputError(f"operator is not unitary (|U U^H - 1|_max = {err:.3e})")
    return u


def apply_single_particle_unitary(s: TwoFermionState, u) -> TwoFermionState:
    """Basis change ``w -> U w U^T``."""
    u = _check_unitary(u, 2 * s.k)
    return TwoFermionState(u @ s.w @ u.T)


def apply_local_bilateral_pure(s: TwoFermionState, a) -> TwoFermionState:
    """Unnormalized image ``w -> A w A^T`` under an invertible single-particle map."""
    a = np.asarray(a, dtype=complex)
    n = 2 * s.k
    if a.shape != (n, n):
        raise LinAlgInputError(f"operator must be {n}x{n}, got {a.shape}")
    if np.linalg.matrix_rank(a) < n:
        warnings.warn("local operator is singular", RuntimeWarning, stacklevel=2)
    return TwoFermionState(a @ s.w @ a.T)


# Particle-hole route to the dual: explicit Fock space on four modes.

@lru_cache(maxsize=None)
def _annihilators4() -> tuple[np.ndarray, ...]:
    """Jordan-Wigner annihilation operators; bit ``j`` of an index is mode ``j``."""
    ops = []
    for j in range(4):
        op = np.zeros((16, 16))
        for n in range(16):
            if n >> j & 1:
                sign = (-1) ** bin(n & ((1 << j) - 1)).count("1")
                op[n ^ (1 << j), n] = sign
        op.setflags(write=False)
        ops.append(op)
    return tuple(ops)


@lru_cache(maxsize=None)
def _pair_kets4() -> np.ndarray:
    """Columns are ``f_a^+ f_b^+ |0>`` for ``a < b`` in the Fock basis."""
    f = _annihilators4()
    vac = np.zeros(16)
    vac[0] = 1
    kets = np.column_stack([f[a].T @ (f[b].T @ vac) for a, b in basis.pairs(2)])
    kets.setflags(write=False)
    return kets


def particle_hole_dual(s: TwoFermionState) -> TwoFermionState:
    """Dual state as ``-U_ph K`` acting in Fock space.

    ``U_ph`` maps ``f_a^+ -> f_a`` and the vacuum to the filled state, and
    ``K`` conjugates amplitudes in the mode basis.
    """
    _require_k2(s, "the particle-hole dual")
    f = _annihilators4()
    filled = np.zeros(16)
    filled[15] = 1
    out = np.zeros(16, dtype=complex)
    for i, (a, b) in enumerate(basis.pairs(2)):
        # sum over ordered (a,b),(b,a) of conj(w) f_a f_b collapses to conj(2 w_ab) f_a f_b
        out -= np.conj(2 * s.w[a, b]) * (f[a] @ (f[b] @ filled))
    amps = _pair_kets4().T @ out
    return TwoFermionState.from_vector(amps, 2)
