"""Dense complex kernels for antisymmetric and complex symmetric matrices.

Everything here works on plain ``numpy`` arrays.  Results of the two
factorizations are returned as small frozen dataclasses that can rebuild
their input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

ANTISYM_INPUT_TOL = 1e-13
SYMMETRIC_INPUT_TOL = 1e-12
HERMITIAN_INPUT_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-9


class LinAlgInputError(ValueError):
    """Input matrix does not have the structure an operation requires."""


class ConvergenceError(RuntimeError):
    """The underlying eigensolver failed."""


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.abs(m).max(initial=0.0)))


def _square(m, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinAlgInputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise LinAlgInputError(f"{name} has non-finite entries")
    return m


def antisymmetric(m, tol: float = ANTISYM_INPUT_TOL) -> np.ndarray:
    """Validate ``m = -m.T`` and return the exactly antisymmetrized copy."""
    m = _square(m, "antisymmetric matrix")
    err = float(np.abs(m + m.T).max(initial=0.0))
    if err > tol * _scale(m):
        raise LinAlgInputError(f"matrix is not antisymmetric (|m + m^T|_max = {err:.3e})")
    return (m - m.T) / 2


def block_form(z, n: int) -> np.ndarray:
    """Canonical block matrix with ``[[0, z_i], [-z_i, 0]]`` blocks first, then zeros."""
    out = np.zeros((n, n), dtype=complex)
    for i, zi in enumerate(z):
        out[2 * i, 2 * i + 1] = zi
        out[2 * i + 1, 2 * i] = -zi
    return out


@dataclass(frozen=True)
class YoulaDecomposition:
    """``a = u @ Z @ u.T`` with ``Z`` built from the descending coefficients ``z``.

    Pair ``i`` occupies columns ``2i, 2i+1`` of ``u``; the trailing
    ``null_dim`` columns span the kernel.
    """

    u: np.ndarray
    z: np.ndarray
    null_dim: int

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def block_count(self) -> int:
        return len(self.z)

    def block_matrix(self) -> np.ndarray:
        return block_form(self.z, self.n)

    def reconstruct(self) -> np.ndarray:
        return self.u @ self.block_matrix() @ self.u.T


def _complete_unitary(cols: list[np.ndarray], n: int) -> np.ndarray:
    if not cols:
        return np.eye(n, dtype=complex)
    q = np.column_stack(cols)
    if q.shape[1] == n:
        return q
    return np.hstack([q, sla.null_space(q.conj().T)])


def youla_decompose(a, tol: float = DEFAULT_RANK_TOL) -> YoulaDecomposition:
    """Block-diagonalize a complex antisymmetric matrix by a unitary congruence.

    The top eigenvector ``x`` of the hermitian ``a a^H`` pairs with
    ``a conj(x) / sigma``; the pair spans an invariant block, which is
    projected out before the next step.  Degenerate eigenvalues need no
    special treatment since any vector of the top eigenspace works.
    Coefficients at or below ``tol * max(z)`` are treated as zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = antisymmetric(a)
    n = a.shape[0]
    cur = a.copy()
    cols: list[np.ndarray] = []
    zs: list[float] = []
    zmax = 0.0
    for _ in range(n // 2):
        lam, vecs = hermitian_eig(cur @ cur.conj().T, check=False)
        sigma = float(np.sqrt(max(lam[0], 0.0)))
        if sigma <= tol * max(zmax, 1e-300) or sigma == 0.0:
            break
        zmax = max(zmax, sigma)
        x = vecs[:, 0]
        partner = cur @ x.conj() / sigma
        # Re-orthogonalize against x; exact in theory, cleans roundoff.
        partner -= x * np.vdot(x, partner)
        partner /= np.linalg.norm(partner)
        cols += [partner, x]
        zs.append(sigma)
        q = np.column_stack([partner, x])
        proj = np.eye(n) - q @ q.conj().T
        cur = proj @ cur @ proj.T
    order = np.argsort(zs, kind="stable")[::-1]
    ordered = [c for i in order for c in (cols[2 * i], cols[2 * i + 1])]
    u = _complete_unitary(ordered, n)
    z = np.array([zs[i] for i in order], dtype=float)
    return YoulaDecomposition(u=u, z=z, null_dim=n - 2 * len(z))


@dataclass(frozen=True)
class TakagiFactorization:
    """``c = u @ diag(values) @ u.T`` with real nonnegative descending ``values``."""

    u: np.ndarray
    values: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.values) @ self.u.T


def takagi_factorize(c, tol: float = SYMMETRIC_INPUT_TOL) -> TakagiFactorization:
    """Takagi factorization of a complex symmetric matrix.

    Uses the real symmetric embedding ``[[Re c, Im c], [Im c, -Re c]]``,
    whose eigenpairs ``(sigma, (x, y))`` with ``sigma > 0`` give Takagi
    vectors ``x + i y``.  Vectors of one degenerate eigenvalue come out
    orthonormal automatically, so no phase fixing within clusters is needed.
    A phase-preserving Gram-Schmidt pass (largest values first) cleans up
    columns belonging to vanishing values.
    """
    c = _square(c, "symmetric matrix")
    err = float(np.abs(c - c.T).max(initial=0.0))
    if err > tol * _scale(c):
        raise LinAlgInputError(f"matrix is not symmetric (|c - c^T|_max = {err:.3e})")
    c = (c + c.T) / 2
    r = c.shape[0]
    if r == 0:
        return TakagiFactorization(u=np.zeros((0, 0), complex), values=np.zeros(0))
    re, im = c.real, c.imag
    embed = np.block([[re, im], [im, -re]])
    try:
        lam, vecs = np.linalg.eigh(embed)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Takagi eigensolver failed: {exc}") from exc
    lam = lam[::-1][:r]
    vecs = vecs[:, ::-1][:, :r]
    u = vecs[:r] + 1j * vecs[r:]
    q, rr = np.linalg.qr(u)
    diag = np.diag(rr)
    mag = np.abs(diag)
    u = q * np.where(mag > 1e-300, diag / np.where(mag > 1e-300, mag, 1.0), 1.0)
    values = np.clip(lam, 0.0, None)
    return TakagiFactorization(u=u, values=values)


def hermitian_eig(h, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors of a hermitian matrix."""
    h = _square(h, "hermitian matrix")
    if check:
        err = float(np.abs(h - h.conj().T).max(initial=0.0))
        if err > HERMITIAN_INPUT_TOL * _scale(h):
            raise LinAlgInputError(f"matrix is not hermitian (|h - h^H|_max = {err:.3e})")
    try:
        lam, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"hermitian eigensolver failed: {exc}") from exc
    return lam[::-1], vecs[:, ::-1]


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


LEVI_CIVITA4 = _levi_civita4()
LEVI_CIVITA4.setflags(write=False)


def _check4(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (4, 4):
        raise LinAlgInputError(f"{name} must be 4x4, got shape {a.shape}")
    return a


def pfaffian4(a) -> complex:
    """Pfaffian of a 4x4 antisymmetric matrix: a12 a34 - a13 a24 + a14 a23."""
    a = antisymmetric(_check4(a, "pfaffian4 input"))
    return complex(a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2])


def epsilon_contract(w1, w2) -> complex:
    """Full contraction ``sum eps^{abcd} w1_ab w2_cd`` of two 4x4 matrices."""
    w1 = _check4(w1, "first operand")
    w2 = _check4(w2, "second operand")
    return complex(np.einsum("abcd,ab,cd->", LEVI_CIVITA4, w1, w2))
