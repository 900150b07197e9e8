"""Slater witnesses for general K.

Infima over states of bounded Slater rank are computed numerically: a
state of Slater rank at most ``m`` is written ``w = (U V^T - V U^T) / 2``
with unconstrained ``U, V`` of shape ``2K x m``, and the Rayleigh quotient
of the target operator is minimized by multi-start L-BFGS.  Every quantity
derived from such a search is an upper bound on the true infimum, which is
why results carry a ``converged`` flag and witnesses a sampled
``certified_nonneg`` value rather than a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import basis
from .linalg import LinAlgInputError, hermitian_eig
from .mixed import MixedState
from .pure import TwoFermionState, maximally_correlated, slater_decompose
from .sampling import SeedLike, rng_from

NONNEG_TOL = 1e-8
RANGE_TOL = 1e-10
KERNEL_THRESHOLD = 1e-10
TANGENT_TOL = 1e-8
ANNIHILATION_TOL = 1e-8


class WitnessError(ValueError):
    """A witness construction or optimization precondition failed."""


@dataclass(frozen=True)
class Budget:
    """Multi-start search effort: ``starts`` local runs of at most ``maxiter`` steps."""

    starts: int = 16
    maxiter: int = 500
    seed: SeedLike = 0


# ---------------------------------------------------------------- search core

def _unpack(x: np.ndarray, n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    z = x[: 2 * n * m] + 1j * x[2 * n * m:]
    return z[: n * m].reshape(n, m), z[n * m:].reshape(n, m)


def _amplitudes(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    g = u @ v.T - v @ u.T
    rows, cols = np.triu_indices(g.shape[0], 1)
    return g[rows, cols]


def _rayleigh(h: np.ndarray, n: int, m: int):
    rows, cols = np.triu_indices(n, 1)

    def fun(x):
        u, v = _unpack(x, n, m)
        psi = _amplitudes(u, v)
        nrm = float(np.vdot(psi, psi).real)
        if nrm < 1e-300:
            return 1e300, np.zeros_like(x)
        hpsi = h @ psi
        f = float(np.vdot(psi, hpsi).real) / nrm
        g = (hpsi - f * psi) / nrm
        gam = np.zeros((n, n), dtype=complex)
        gam[rows, cols] = g
        gam[cols, rows] = -g
        gam = gam.conj()
        du = gam @ v
        dv = -gam @ u
        d = np.concatenate([du.ravel(), dv.ravel()])
        return f, np.concatenate([2 * d.real, -2 * d.imag])

    return fun


def _rank_limited_state(x: np.ndarray, n: int, m: int) -> TwoFermionState:
    u, v = _unpack(x, n, m)
    return TwoFermionState((u @ v.T - v @ u.T) / 2).normalize()


@dataclass(frozen=True, eq=False)
class ClassMinimum:
    value: float
    state: TwoFermionState
    converged: bool
    runs: list = field(default_factory=list, repr=False)


def _hermitian_operator(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise LinAlgInputError(f"operator must be square, got shape {h.shape}")
    basis.k_from_dim(h.shape[0])
    err = float(np.abs(h - h.conj().T).max())
    if err > 1e-12 * max(1.0, float(np.abs(h).max())):
        raise LinAlgInputError(f"operator is not hermitian (deviation {err:.3e})")
    return (h + h.conj().T) / 2


def min_over_slater_class(h, k: int, max_rank: int | None = None,
                          budget: Budget = Budget(), keep_runs: bool = False) -> ClassMinimum:
    """Smallest ``<psi|h|psi>`` over normalized states of Slater rank ``<= max_rank``.

    ``max_rank`` defaults to ``k - 1``.  The returned value bounds the true
    infimum from above.
    """
    h = _hermitian_operator(h)
    big_k = basis.k_from_dim(h.shape[0])
    m = k - 1 if max_rank is None else max_rank
    if not 1 <= m <= big_k:
        raise WitnessError(f"max_rank must be in 1..{big_k}, got {m}")
    n = 2 * big_k
    fun = _rayleigh(h, n, m)
    rng = rng_from(budget.seed)
    best = None
    runs = []
    for _ in range(max(1, budget.starts)):
        x0 = rng.standard_normal(4 * n * m)
        res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": budget.maxiter, "ftol": 1e-15, "gtol": 1e-11})
        if keep_runs:
            runs.append((float(res.fun), res.x))
        if best is None or res.fun < best.fun:
            best = res
    state = _rank_limited_state(best.x, n, m)
    # Rank <= m is guaranteed by construction; converged refers to the best run.
    converged = bool(best.success or best.nit < budget.maxiter)
    return ClassMinimum(value=float(best.fun), state=state, converged=converged, runs=runs)


def sup_over_slater_class(h, k: int, max_rank: int | None = None,
                          budget: Budget = Budget()) -> ClassMinimum:
    res = min_over_slater_class(-np.asarray(h, dtype=complex), k, max_rank, budget)
    return replace(res, value=-res.value)


def expectation(h: np.ndarray, s: TwoFermionState) -> float:
    v = s.vector
    return float(np.vdot(v, h @ v).real / np.vdot(v, v).real)


# ---------------------------------------------------------------- witnesses

PROVENANCES = ("canonical", "example", "optimized", "user")


@dataclass(frozen=True, eq=False)
class WitnessOperator:
    """Hermitian operator on the antisymmetric space, of class ``k_class``.

    ``certified_nonneg`` is the best (sampled) lower-class expectation found,
    or None when it was not estimated.
    """

    op: np.ndarray
    k_class: int
    provenance: str = "user"
    certified_nonneg: float | None = None

    def __post_init__(self):
        op = _hermitian_operator(self.op)
        op.setflags(write=False)
        object.__setattr__(self, "op", op)
        if self.k_class < 2:
            raise WitnessError("witness class must be at least 2")
        if self.k_class > self.k:
            raise WitnessError(f"witness class {self.k_class} exceeds K={self.k}")
        if self.provenance not in PROVENANCES:
            raise WitnessError(f"unknown provenance {self.provenance!r}")

    @property
    def k(self) -> int:
        return basis.k_from_dim(self.op.shape[0])

    def __repr__(self) -> str:
        return f"WitnessOperator(K={self.k}, k_class={self.k_class}, provenance={self.provenance!r})"


def example_witness(k_total: int, k_class: int) -> WitnessOperator:
    """``1 - K/(k-1) |Psi_max><Psi_max|``; its lower-class infimum is exactly 0."""
    if not 2 <= k_class <= k_total:
        raise WitnessError(f"class must satisfy 2 <= k <= K, got k={k_class}, K={k_total}")
    v = maximally_correlated(k_total).vector
    op = np.eye(basis.dim(k_total)) - k_total / (k_class - 1) * np.outer(v, v.conj())
    return WitnessOperator(op, k_class, "example", certified_nonneg=0.0)


def example_tangent_state(phases) -> TwoFermionState:
    """Determinant ``g1^+ g2^+ |0>`` where the K=2 example witness vanishes.

    ``phases = (p11, p12, p21, p22)``; with modes 0,1 and 2,3 forming the
    pairs of the maximally correlated state,
    ``g1 = (e^{i p11}, e^{i p12}, e^{i p21}, e^{i p22})`` and
    ``g2 = (-e^{-i p12}, e^{-i p11}, -e^{-i p22}, e^{-i p21})``.
    """
    p11, p12, p21, p22 = phases
    g1 = np.exp(1j * np.array([p11, p12, p21, p22]))
    g2 = np.array([-np.exp(-1j * p12), np.exp(-1j * p11), -np.exp(-1j * p22), np.exp(-1j * p21)])
    return TwoFermionState((np.outer(g1, g2) - np.outer(g2, g1)) / 2).normalize()


def _check_dims(w: WitnessOperator, m: MixedState) -> None:
    if w.op.shape != m.rho.shape:
        raise LinAlgInputError(f"witness acts on dimension {w.op.shape[0]}, state on {m.dim}")


def evaluate(w: WitnessOperator, m: MixedState) -> float:
    """``Tr(W rho)``; negative values flag Slater number at least ``k_class``."""
    _check_dims(w, m)
    return float(np.trace(w.op @ m.rho).real)


def certify(w: WitnessOperator, budget: Budget = Budget()) -> WitnessOperator:
    """Attach a sampled estimate of the infimum over lower-class pure states."""
    res = min_over_slater_class(w.op, w.k_class, budget=budget)
    return replace(w, certified_nonneg=res.value)


def _range_projectors(rho: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lam, vecs = hermitian_eig(rho)
    keep = lam > threshold * max(lam[0], 1e-300)
    vr = vecs[:, keep]
    vk = vecs[:, ~keep]
    return vr @ vr.conj().T, vk @ vk.conj().T, lam[keep], vr


def kernel_projector(m: MixedState, threshold: float = KERNEL_THRESHOLD) -> np.ndarray:
    return _range_projectors(m.rho, threshold)[1]


def canonical_witness(delta: MixedState, k: int = 2, c_op=None,
                      budget: Budget = Budget()) -> WitnessOperator:
    """``W = P - (eps / c) C`` with ``P`` the projector onto the kernel of ``delta``.

    ``eps`` is the minimum of ``P`` and ``c`` the maximum of ``C`` over states
    of Slater rank below ``k``; ``C`` defaults to the identity.
    """
    p = kernel_projector(delta)
    c_op = np.eye(delta.dim) if c_op is None else _hermitian_operator(c_op)
    if c_op.shape != p.shape:
        raise LinAlgInputError("c_op dimension does not match the edge state")
    if float(np.linalg.eigvalsh(c_op)[0]) < -1e-12:
        raise WitnessError("c_op must be positive semidefinite")
    if float(np.trace(delta.rho @ c_op).real) <= RANGE_TOL:
        raise WitnessError("Tr(delta c_op) must be positive")
    eps = min_over_slater_class(p, k, budget=budget)
    if eps.value <= RANGE_TOL:
        raise WitnessError(
            f"state is not a {k}-edge state: a Slater-rank-{k - 1} state lies in its range "
            f"(kernel weight {eps.value:.3e})")
    c = sup_over_slater_class(c_op, k, budget=budget).value
    op = p - (eps.value / c) * c_op
    w = WitnessOperator(op, k, "canonical")
    return certify(w, budget)


# ---------------------------------------------------------------- edge states

@dataclass(frozen=True, eq=False)
class EdgeCheck:
    is_edge: bool
    state: TwoFermionState | None
    residual: float
    converged: bool


def edge_check(m: MixedState, k: int = 2, budget: Budget = Budget()) -> EdgeCheck:
    """Search the range of ``m`` for a state of Slater rank below ``k``.

    A hit certifies "not edge"; a miss is only heuristic evidence of an edge
    state, reported with the smallest kernel weight found.
    """
    p_ker = kernel_projector(m)
    res = min_over_slater_class(p_ker, k, budget=budget)
    if res.value <= RANGE_TOL:
        return EdgeCheck(False, res.state, res.value, res.converged)
    return EdgeCheck(True, None, res.value, res.converged)


@dataclass(frozen=True, eq=False)
class EdgeDecomposition:
    """``rho = (1 - p) lower + p delta``; ``delta`` is None when ``p == 0``."""

    p: float
    lower: MixedState | None
    delta: MixedState | None
    subtraction_log: list[tuple[TwoFermionState, float]]
    min_eigenvalues: list[float]
    heuristic: bool
    converged: bool = True


def subtract_rank_deficient(m: MixedState, k: int = 2, budget: Budget = Budget(),
                            threshold: float = KERNEL_THRESHOLD) -> EdgeDecomposition:
    """Greedily remove lower-rank pure states from ``m``.

    Each found state ``psi`` in the current range is subtracted with the
    largest weight ``1 / <psi|rho^+|psi>`` that keeps the remainder positive.
    """
    total = m.trace
    cur = np.array(m.rho)
    log: list[tuple[TwoFermionState, float]] = []
    min_eigs: list[float] = []
    heuristic = False
    converged = True
    rng = rng_from(budget.seed)
    for _ in range(m.dim):
        if np.trace(cur).real <= threshold * total:
            cur = np.zeros_like(cur)
            break
        proj_range, proj_ker, lam, vr = _range_projectors(cur, threshold)
        step = replace(budget, seed=rng)
        res = min_over_slater_class(proj_ker, k, budget=step)
        converged = converged and res.converged
        if res.value > RANGE_TOL:
            heuristic = True
            break
        psi = proj_range @ res.state.vector
        psi /= np.linalg.norm(psi)
        coords = vr.conj().T @ psi
        lam_max = 1.0 / float(np.sum(np.abs(coords) ** 2 / lam))
        cur = cur - lam_max * np.outer(psi, psi.conj())
        cur = (cur + cur.conj().T) / 2
        evals, evecs = np.linalg.eigh(cur)
        min_eigs.append(float(evals[0]))
        evals = np.where(evals > threshold * total, evals, 0.0)
        cur = (evecs * evals) @ evecs.conj().T
        log.append((TwoFermionState.from_vector(psi, m.k), lam_max / total))
    p = float(np.trace(cur).real / total)
    if p <= threshold:
        p = 0.0
    delta = MixedState(cur / np.trace(cur).real) if p > 0 else None
    lower = None
    if p < 1:
        rest = m.rho - cur
        lower = MixedState(rest / np.trace(rest).real)
    return EdgeDecomposition(p=p, lower=lower, delta=delta, subtraction_log=log,
                             min_eigenvalues=min_eigs, heuristic=heuristic, converged=converged)


# ---------------------------------------------------------------- tangency

@dataclass(frozen=True, eq=False)
class TangentSample:
    """Lower-class states with vanishing witness expectation.

    ``span_dim`` ranks the flattened projectors ``|psi><psi|``; every such
    projector is orthogonal to ``W``, so it stays below ``d^2`` (and in
    practice well below ``d^2 - 1``).  ``vector_span_dim`` ranks the state
    vectors themselves; reaching ``d`` means the tangent states span the
    whole antisymmetric space.
    """

    states: list[TwoFermionState]
    values: list[float]
    span_dim: int
    vector_span_dim: int


def _numerical_rank(m: np.ndarray, rtol: float = 1e-6) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > rtol * max(s[0], 1e-300)))


def span_dimensions(states: list[TwoFermionState]) -> tuple[int, int]:
    if not states:
        return 0, 0
    vecs = np.array([s.normalize().vector for s in states])
    projs = np.array([np.outer(v, v.conj()).ravel() for v in vecs])
    return _numerical_rank(projs), _numerical_rank(vecs)


def _min_orthogonal(x: np.ndarray, e: np.ndarray) -> np.ndarray:
    q = np.linalg.svd(e[:, None], full_matrices=True)[0][:, 1:]
    vals, vecs = np.linalg.eigh(q.conj().T @ x @ q)
    return q @ vecs[:, 0]


def polish_determinant(h: np.ndarray, s: TwoFermionState, sweeps: int = 200) -> TwoFermionState:
    """Refine a determinant near a minimum of ``<psi|h|psi>``.

    Alternately replaces each orbital by the lowest eigenvector of the
    localized operator at the other one (restricted to its complement),
    which pins the state down to machine precision instead of the square
    root of it.
    """
    u = slater_decompose(s).basis
    e, f = u[:, 0], u[:, 1]
    best = TwoFermionState((np.outer(e, f) - np.outer(f, e)) / 2)
    best_val = expectation(h, best)
    for _ in range(sweeps):
        f = _min_orthogonal(localized_operator(h, e), e)
        e = _min_orthogonal(localized_operator(h, f), f)
        cand = TwoFermionState((np.outer(e, f) - np.outer(f, e)) / 2)
        val = expectation(h, cand)
        done = abs(val - best_val) <= 1e-16 * max(1.0, abs(val))
        if val <= best_val:
            best, best_val = cand, val
        if done:
            break
    return best


def tangent_probe(w: WitnessOperator, budget: Budget = Budget(starts=64),
                  tol: float = TANGENT_TOL) -> TangentSample:
    """Lower-class states where ``w`` vanishes, from the runs of a multi-start search."""
    res = min_over_slater_class(w.op, w.k_class, budget=budget, keep_runs=True)
    n = 2 * w.k
    m = w.k_class - 1
    states, values = [], []
    for val, x in res.runs:
        if abs(val) <= tol:
            s = _rank_limited_state(x, n, m)
            if m == 1:
                s = polish_determinant(w.op, s)
                val = expectation(w.op, s)
            states.append(s)
            values.append(val)
    span, vspan = span_dimensions(states)
    return TangentSample(states=states, values=values, span_dim=span, vector_span_dim=vspan)


def localized_operator(x, e) -> np.ndarray:
    """``X_e`` on ``C^2K`` from the four partial matrix elements at ``e``.

    ``X`` (an operator on the antisymmetric space) is first lifted to the
    full tensor space; for a determinant ``e ^ f`` one has
    ``<e^f|X|e^f> = f^H X_e f`` up to the normalization of ``e ^ f``.
    """
    x = np.asarray(x, dtype=complex)
    e = np.asarray(e, dtype=complex)
    k = basis.k_from_dim(x.shape[0])
    n = 2 * k
    if e.shape != (n,):
        raise LinAlgInputError(f"e must be a vector of length {n}")
    if abs(np.linalg.norm(e) - 1) > 1e-10:
        raise LinAlgInputError("e must be normalized")
    t = basis.embed_operator(x).reshape(n, n, n, n)
    ec = e.conj()
    return (np.einsum("p,piqj,q->ij", ec, t, e)
            - np.einsum("p,pijq,q->ij", ec, t, e)
            - np.einsum("p,ipqj,q->ij", ec, t, e)
            + np.einsum("p,ipjq,q->ij", ec, t, e))


def _min_generalized(we: np.ndarray, pe: np.ndarray, cutoff: float = 1e-12) -> float:
    lam, vecs = np.linalg.eigh(pe)
    keep = lam > cutoff * max(lam[-1], 1e-300)
    if not keep.any():
        return np.inf
    s = vecs[:, keep] / np.sqrt(lam[keep])
    return float(np.linalg.eigvalsh(s.conj().T @ we @ s)[0])


def xe_screen(w: WitnessOperator, p_sub: np.ndarray, budget: Budget = Budget()) -> float:
    """Sampled ``inf_e`` of the smallest eigenvalue of ``P_e^{-1/2} W_e P_e^{-1/2}``.

    Positive values mean ``W - lambda P`` stays a class-2 witness for
    ``lambda`` up to (about) the returned value.
    """
    n = 2 * w.k
    rng = rng_from(budget.seed)

    def f(xr):
        e = xr[:n] + 1j * xr[n:]
        e = e / np.linalg.norm(e)
        val = _min_generalized(localized_operator(w.op, e), localized_operator(p_sub, e))
        return min(val, 1e6)

    starts = [rng.standard_normal(2 * n) for _ in range(max(4, 4 * budget.starts))]
    vals = [f(x) for x in starts]
    best = min(vals)
    for i in np.argsort(vals)[: max(1, budget.starts // 4)]:
        res = minimize(f, starts[i], method="Nelder-Mead",
                       options={"maxiter": 50 * budget.maxiter // 10, "xatol": 1e-10, "fatol": 1e-13})
        best = min(best, float(res.fun))
    return best


@dataclass(frozen=True, eq=False)
class WitnessOptimization:
    witness: WitnessOperator
    lam: float
    screen: float | None
    tangent: TangentSample


def optimize_witness(w: WitnessOperator, p_sub, budget: Budget = Budget(),
                     tangent: TangentSample | None = None, bisection_steps: int = 24) -> WitnessOptimization:
    """Subtract the largest multiple of ``p_sub`` that keeps ``w`` a witness.

    ``p_sub`` must be positive and annihilate the tangent states of ``w``.
    For class-2 witnesses the step is bracketed by :func:`xe_screen` and then
    confirmed by bisection on sampled lower-class minima.  ``lam == 0`` means
    no positive step exists along ``p_sub``.
    """
    p_sub = _hermitian_operator(p_sub)
    if p_sub.shape != w.op.shape:
        raise LinAlgInputError("p_sub dimension does not match the witness")
    if float(np.linalg.eigvalsh(p_sub)[0]) < -1e-10:
        raise WitnessError("p_sub must be positive semidefinite")
    if tangent is None:
        tangent = tangent_probe(w, replace(budget, starts=max(budget.starts, 32)))
    for s in tangent.states:
        v = s.normalize().vector
        if np.linalg.norm(p_sub @ v) > ANNIHILATION_TOL:
            raise WitnessError("p_sub does not annihilate the tangent states of the witness")
    if np.abs(p_sub).max() <= 1e-14:
        return WitnessOptimization(w, 0.0, None, tangent)

    def admissible(lam: float) -> bool:
        res = min_over_slater_class(w.op - lam * p_sub, w.k_class, budget=budget)
        return res.value >= -NONNEG_TOL

    screen = None
    if w.k_class == 2:
        screen = xe_screen(w, p_sub, budget)
        if screen <= NONNEG_TOL:
            return WitnessOptimization(w, 0.0, screen, tangent)
        hi = screen
    else:
        hi = float(np.abs(w.op).max() / np.abs(p_sub).max())
        while admissible(hi) and hi < 1e6:
            hi *= 2
    lo = 0.0
    if admissible(hi):
        lo = hi
    else:
        for _ in range(bisection_steps):
            mid = (lo + hi) / 2
            if admissible(mid):
                lo = mid
            else:
                hi = mid
    if lo <= 0:
        return WitnessOptimization(w, 0.0, screen, tangent)
    out = certify(WitnessOperator(w.op - lo * p_sub, w.k_class, "optimized"), budget)
    return WitnessOptimization(out, lo, screen, tangent)


def detection_count(w: WitnessOperator, corpus: list[MixedState]) -> int:
    return sum(evaluate(w, m) < 0 for m in corpus)


# ---------------------------------------------------------------- positive maps

def full_operator(w: WitnessOperator, symmetric_fill: float = 1.0) -> np.ndarray:
    """``W`` on ``C^2K (x) C^2K``.

    The default fill extends the antisymmetric identity to the full identity,
    so the example witness reads ``1 - K/(k-1) P`` on the whole space.
    """
    return basis.embed_operator(w.op, symmetric_fill)


def partial_transpose_first(x: np.ndarray, n: int) -> np.ndarray:
    return x.reshape(n, n, n, n).transpose(2, 1, 0, 3).reshape(n * n, n * n)


def witness_partial_transpose(w: WitnessOperator, symmetric_fill: float = 1.0) -> np.ndarray:
    return partial_transpose_first(full_operator(w, symmetric_fill), 2 * w.k)


def jamiolkowski_map(w: WitnessOperator, rho, symmetric_fill: float = 1.0) -> np.ndarray:
    """``Tr_A(W rho^{T_A})`` mapping states on ``A (x) C`` to operators on ``B (x) C``."""
    n = 2 * w.k
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n * n, n * n):
        raise LinAlgInputError(f"state must act on C^{n} (x) C^{n}, got shape {rho.shape}")
    wt = full_operator(w, symmetric_fill).reshape(n, n, n, n)
    r = rho.reshape(n, n, n, n)
    return np.einsum("abxy,acxz->bcyz", wt, r).reshape(n * n, n * n)
