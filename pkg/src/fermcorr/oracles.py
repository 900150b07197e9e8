"""Brute-force reference computations.

Nothing here reuses the analytic kernels: the Levi-Civita tensor, the
coefficient-matrix layout and the norms are rebuilt locally so that a
shared bug cannot make both paths agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import least_squares

from .mixed import MixedState
from .pure import TwoFermionState
from .sampling import SeedLike, rng_from


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    analytic: complex | float
    oracle: complex | float
    abs_err: float
    samples: int
    seed: int | None

    @classmethod
    def compare(cls, quantity: str, analytic, oracle, samples: int = 1, seed=None) -> "OracleReport":
        return cls(quantity, analytic, oracle, float(abs(analytic - oracle)), samples, seed)


def _parity(p) -> int:
    inversions = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return -1 if inversions % 2 else 1


def _levi_civita():
    eps = {}
    for p in permutations(range(4)):
        eps[p] = _parity(p)
    return eps


_EPS = _levi_civita()


def _coefficients_k2(vec) -> list[list[complex]]:
    """Coefficient matrix from basis amplitudes, as nested lists."""
    order = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    w = [[0j] * 4 for _ in range(4)]
    for amp, (a, b) in zip(vec, order):
        w[a][b] = complex(amp) / 2
        w[b][a] = -complex(amp) / 2
    return w


def _contract(w1, w2) -> complex:
    total = 0j
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    e = _EPS.get((a, b, c, d), 0)
                    if e:
                        total += e * w1[a][b] * w2[c][d]
    return total


def eta_bruteforce(s: TwoFermionState) -> float:
    """``|sum eps^{abcd} w_ab w_cd|`` by an explicit loop over all 256 index tuples."""
    if s.k != 2:
        raise ValueError(f"eta is defined only for K=2, got K={s.k}")
    w = _coefficients_k2(s.vector)
    norm2 = 2 * sum(abs(w[a][b]) ** 2 for a in range(4) for b in range(4))
    if abs(norm2 - 1) > 1e-10:
        raise ValueError("eta needs a normalized state")
    return abs(_contract(w, w))


@dataclass(frozen=True)
class RankEstimate:
    rank: int
    residuals: tuple[float, ...]
    upper_bound_only: bool


def rank_oracle(s: TwoFermionState, tol: float = 1e-8, starts: int = 6, seed: SeedLike = 0) -> RankEstimate:
    """Smallest ``r`` such that ``w`` is fitted by ``sum_{i<=r} (u_i v_i^T - v_i u_i^T) / 2``.

    The fit is a multi-start least-squares problem; a residual (relative to
    the norm of ``w``) at most ``tol`` accepts the rank.  When the search
    stops at ``r = K`` without reaching ``tol`` the answer is flagged as an
    upper bound.
    """
    w = np.array(s.w)
    n = w.shape[0]
    scale = np.sqrt(np.sum(np.abs(w) ** 2))
    if scale == 0:
        return RankEstimate(0, (), False)
    target = w / scale
    rng = rng_from(seed)
    rows, cols = np.triu_indices(n, 1)
    residuals = []
    for r in range(1, n // 2 + 1):
        def resid(x):
            z = x[: 2 * n * r] + 1j * x[2 * n * r:]
            u = z[: n * r].reshape(n, r)
            v = z[n * r:].reshape(n, r)
            diff = ((u @ v.T - v @ u.T) / 2 - target)[rows, cols]
            return np.concatenate([diff.real, diff.imag])

        def jac(x):
            z = x[: 2 * n * r] + 1j * x[2 * n * r:]
            u = z[: n * r].reshape(n, r)
            v = z[n * r:].reshape(n, r)
            # d(diff_ab)/du_ci = (delta_ac v_bi - delta_bc v_ai) / 2, and u <-> v with a sign flip
            ju = np.zeros((len(rows), n, r), dtype=complex)
            jv = np.zeros((len(rows), n, r), dtype=complex)
            idx = np.arange(len(rows))
            ju[idx, rows] += v[cols] / 2
            ju[idx, cols] -= v[rows] / 2
            jv[idx, cols] += u[rows] / 2
            jv[idx, rows] -= u[cols] / 2
            j = np.concatenate([ju.reshape(len(rows), -1), jv.reshape(len(rows), -1)], axis=1)
            return np.block([[j.real, -j.imag], [j.imag, j.real]])

        best = np.inf
        for _ in range(starts):
            sol = least_squares(resid, rng.standard_normal(4 * n * r), jac=jac, max_nfev=100,
                                xtol=1e-15, ftol=1e-15, gtol=1e-15)
            best = min(best, float(np.sqrt(2 * np.sum(sol.fun ** 2))))
            if best <= tol:
                break
        residuals.append(best)
        if best <= tol:
            return RankEstimate(r, tuple(residuals), False)
    return RankEstimate(n // 2, tuple(residuals), True)


def _correlation_bruteforce(m: MixedState, eig_threshold: float = 1e-10) -> np.ndarray:
    lam, vecs = np.linalg.eigh(m.rho)
    ws = [_coefficients_k2(np.sqrt(l) * vecs[:, i]) for i, l in enumerate(lam) if l > eig_threshold]
    r = len(ws)
    c = np.empty((r, r), dtype=complex)
    for i in range(r):
        for j in range(r):
            c[i, j] = _contract(ws[i], ws[j])
    return c


_SMOOTHING = (None, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8)


def decomposition_search(m: MixedState, n_trials: int = 10_000, seed: SeedLike = 0,
                         batch: int = 16, constituents: int = 8) -> float:
    """Smallest average ``eta`` over decompositions found by random search.

    A decomposition ``phi_k = sum_i U_ki psi_i`` of the subnormalized
    eigenvectors is fixed by an isometry ``U`` (``constituents x r``), and
    its average ``eta`` is ``sum_k |(U C U^T)_kk|``.  ``batch`` random
    isometries descend on the Stiefel manifold, first on a smooth surrogate
    and then on progressively sharper smoothings of ``|.|``; ``n_trials``
    counts objective evaluations.  Every value seen belongs to an actual
    decomposition, so the result bounds the Slater measure from above.
    """
    if m.k != 2:
        raise ValueError(f"decomposition search is defined only for K=2, got K={m.k}")
    c = _correlation_bruteforce(m)
    r = c.shape[0]
    if r == 1:
        return float(abs(c[0, 0]))
    rng = rng_from(seed)
    rp = max(constituents, r)
    x = rng.standard_normal((batch, rp, r)) + 1j * rng.standard_normal((batch, rp, r))
    a, _, bh = np.linalg.svd(x, full_matrices=False)
    u = a @ bh

    def objective(u, mu):
        q = np.einsum("bki,ij,bkj->bk", u, c, u)
        if mu is None:
            return np.sum(np.abs(q) ** 2, axis=1), q
        return np.sum(np.sqrt(np.abs(q) ** 2 + mu * mu), axis=1), q

    best = np.inf
    step = np.full(batch, 0.1)
    per_stage = max(1, n_trials // batch // len(_SMOOTHING))
    for mu in _SMOOTHING:
        fv, q = objective(u, mu)
        best = min(best, float(np.abs(q).sum(axis=1).min()))
        for _ in range(per_stage):
            coef = 2 * q if mu is None else q / np.sqrt(np.abs(q) ** 2 + mu * mu)
            g = 2 * coef[:, :, None] * (u @ c).conj()
            uhg = np.conj(np.swapaxes(u, 1, 2)) @ g
            riem = g - u @ (uhg + np.conj(np.swapaxes(uhg, 1, 2))) / 2
            a, _, bh = np.linalg.svd(u - step[:, None, None] * riem, full_matrices=False)
            un = a @ bh
            fn, qn = objective(un, mu)
            ok = fn < fv
            u = np.where(ok[:, None, None], un, u)
            fv = np.where(ok, fn, fv)
            q = np.where(ok[:, None], qn, q)
            step = np.where(ok, step * 1.3, step * 0.5)
            best = min(best, float(np.abs(q).sum(axis=1).min()))
    return best
