"""``fermcorr`` command line interface.

Every command prints an :class:`~fermcorr.io.AnalysisReport`.  Exit codes:
0 on success, 2 on invalid input, 3 when the result depends on a
numerical search (a bound or sampled certificate rather than an exact
answer).  The default seed comes from ``FERMCORR_SEED`` (else 0).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import basis, io, mixed, oracles, pure, witnesses
from .linalg import DEFAULT_RANK_TOL, ConvergenceError, LinAlgInputError
from .mixed import MixedState
from .pure import TwoFermionState
from .sampling import random_pure_state
from .witnesses import Budget, WitnessOperator

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_HEURISTIC = 3
TRACE_TOL = 1e-10


class InputError(ValueError):
    pass


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _default_seed() -> int:
    raw = os.environ.get("FERMCORR_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"FERMCORR_SEED must be an integer, got {raw!r}") from None


class _Context:
    def __init__(self, args):
        self.args = args
        self.inputs: list[str] = []
        self.seed = args.seed if args.seed is not None else _default_seed()
        self.budget = Budget(starts=args.budget, seed=self.seed)

    def load(self, path: str) -> io.StateDocument:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from exc
        self.inputs.append(io.digest(raw))
        try:
            return io.parse_state(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise InputError(f"{path}: not UTF-8") from exc
        except io.DocumentError as exc:
            raise InputError(f"{path}: {exc}") from exc

    def load_kind(self, path: str, *kinds: str):
        doc = self.load(path)
        if doc.kind not in kinds:
            raise InputError(f"{path}: expected a {' or '.join(kinds)} document, got {doc.kind}")
        obj = doc.to_object()
        if isinstance(obj, MixedState) and abs(obj.trace - 1) > TRACE_TOL:
            raise InputError(f"{path}: density matrix must have unit trace, got {obj.trace!r}")
        return obj


def cmd_decompose(ctx, a):
    s = ctx.load_kind(a.file, "pure")
    spectrum = pure.slater_decompose(s, a.tol)
    return {"rank": spectrum.rank, "z": spectrum.z[: spectrum.rank], "basis": spectrum.basis}, False


def cmd_rank(ctx, a):
    s = ctx.load_kind(a.file, "pure")
    return {"rank": pure.slater_rank(s, a.tol)}, False


def cmd_eta(ctx, a):
    s = ctx.load_kind(a.file, "pure")
    return {"eta": pure.eta(s), "rank": pure.slater_rank(s, a.tol)}, False


def cmd_dual(ctx, a):
    s = ctx.load_kind(a.file, "pure")
    d = pure.dual_state(s)
    return {"overlap": pure.dual_overlap(s, s), "document": io.to_document(d)}, False


def cmd_slater_number(ctx, a):
    m = ctx.load_kind(a.file, "mixed")
    verdict = mixed.has_slater_number_one(m, a.tol)
    out = {"slater_number_one": verdict.slater_number_one, "margin": verdict.margin}
    plan, states = mixed.synthesize_optimal_decomposition(m)
    out["certificate"] = {
        "constituents": [{"weight": s.norm2, "eta_weight": pure.eta_weight(s),
                          "document": io.to_document(s)} for s in states],
        "reconstruction_error": float(np.abs(MixedState.mixture([(1.0, s) for s in states]).rho
                                             - m.rho).max()),
    }
    return out, False


def cmd_measure(ctx, a):
    m = ctx.load_kind(a.file, "mixed")
    cm = mixed.correlation_matrix(mixed.spectral_decompose(m))
    return {"slater_measure": mixed.slater_measure(m), "takagi_values": cm.c}, False


def _witness_result(w: WitnessOperator) -> dict:
    return {"k_class": w.k_class, "provenance": w.provenance,
            "certified_nonneg": w.certified_nonneg, "document": io.to_document(w)}


def cmd_witness_make_example(ctx, a):
    try:
        w = witnesses.example_witness(a.K, a.k)
    except witnesses.WitnessError as exc:
        raise InputError(str(exc)) from exc
    return _witness_result(w), False


def cmd_witness_canonical(ctx, a):
    delta = ctx.load_kind(a.file, "mixed")
    w = witnesses.canonical_witness(delta, a.k, budget=ctx.budget)
    out = _witness_result(w)
    out["value_on_edge_state"] = witnesses.evaluate(w, delta)
    return out, True


def cmd_witness_eval(ctx, a):
    w = ctx.load_kind(a.witness, "witness")
    m = ctx.load_kind(a.state, "mixed")
    return {"value": witnesses.evaluate(w, m), "detected": witnesses.evaluate(w, m) < 0}, False


def cmd_witness_optimize(ctx, a):
    w = ctx.load_kind(a.file, "witness")
    tangent = witnesses.tangent_probe(w, replace(ctx.budget, starts=max(ctx.budget.starts, 32)))
    if a.p_sub:
        p_sub = ctx.load_kind(a.p_sub, "witness").op
    else:
        # projector onto the complement of the tangent vectors
        d = w.op.shape[0]
        if tangent.states:
            vecs = np.array([s.normalize().vector for s in tangent.states]).T
            u = np.linalg.svd(vecs)[0]
            comp = u[:, tangent.vector_span_dim:]
        else:
            comp = np.eye(d)
        p_sub = comp @ comp.conj().T
    res = witnesses.optimize_witness(w, p_sub, ctx.budget, tangent=tangent)
    out = _witness_result(res.witness)
    out.update(step=res.lam, screen=res.screen, tangent_states=len(tangent.states),
               tangent_span=tangent.span_dim, tangent_vector_span=tangent.vector_span_dim)
    return out, True


def cmd_edge_extract(ctx, a):
    m = ctx.load_kind(a.file, "mixed")
    dec = witnesses.subtract_rank_deficient(m, a.k, ctx.budget)
    out = {"p": dec.p,
           "subtracted": [{"weight": lam, "document": io.to_document(s)} for s, lam in dec.subtraction_log],
           "min_eigenvalues": dec.min_eigenvalues,
           "edge": io.to_document(dec.delta) if dec.delta is not None else None,
           "lower": io.to_document(dec.lower) if dec.lower is not None else None}
    return out, dec.heuristic or not dec.converged


def cmd_map_jamiolkowski(ctx, a):
    w = ctx.load_kind(a.witness, "witness")
    doc = ctx.load(a.state)
    if doc.kind != "mixed" or not doc.full_space or doc.k != w.k:
        raise InputError(f"{a.state}: expected a mixed document on the full {(2 * w.k) ** 2}-dimensional space")
    out = witnesses.jamiolkowski_map(w, doc.to_object())
    return {"min_eigenvalue": float(np.linalg.eigvalsh(out)[0]), "trace": np.trace(out).real,
            "matrix": out}, False


def cmd_oracle(ctx, a):
    if a.quantity == "eta":
        s = ctx.load_kind(a.file, "pure")
        rep = oracles.OracleReport.compare("eta", pure.eta(s), oracles.eta_bruteforce(s))
        return {"report": rep.__dict__}, False
    if a.quantity == "rank":
        s = ctx.load_kind(a.file, "pure")
        est = oracles.rank_oracle(s, seed=ctx.seed)
        rep = oracles.OracleReport.compare("rank", pure.slater_rank(s, a.tol), est.rank, seed=ctx.seed)
        return {"report": rep.__dict__, "residuals": est.residuals}, est.upper_bound_only
    m = ctx.load_kind(a.file, "mixed")
    bound = oracles.decomposition_search(m, a.trials, ctx.seed)
    rep = oracles.OracleReport.compare("slater_measure", mixed.slater_measure(m), bound,
                                       samples=a.trials, seed=ctx.seed)
    return {"report": rep.__dict__}, False


def cmd_random(ctx, a):
    if a.kind == "pure":
        s = random_pure_state(a.k, ctx.seed, rank=a.rank)
        doc = io.to_document(s, {"seed": ctx.seed})
    else:
        rank = a.rank if a.rank is not None else basis.dim(a.k)
        doc = io.to_document(mixed.random_mixed_state(a.k, rank, ctx.seed), {"seed": ctx.seed})
    return {"document": doc}, False


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL, help="rank / margin tolerance")
    p.add_argument("--seed", type=int, default=None, help="random seed (default: $FERMCORR_SEED or 0)")
    p.add_argument("--budget", type=int, default=16, help="number of search restarts")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("-o", "--output", help="also write the produced document to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermcorr", description="Two-fermion correlation toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(subparsers, name, func, help_):
        p = subparsers.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(func=func, name=name)
        return p

    for name, func, help_ in [("decompose", cmd_decompose, "Slater spectrum of a pure state"),
                              ("rank", cmd_rank, "Slater rank of a pure state"),
                              ("eta", cmd_eta, "eta of a normalized K=2 state"),
                              ("dual", cmd_dual, "dual of a K=2 state")]:
        leaf(sub, name, func, help_).add_argument("file")
    leaf(sub, "slater-number", cmd_slater_number, "Slater number one test with a decomposition").add_argument("file")
    leaf(sub, "measure", cmd_measure, "Slater measure of a K=2 mixed state").add_argument("file")

    wit = sub.add_parser("witness", help="witness operations").add_subparsers(dest="witness_command", required=True)
    p = leaf(wit, "make-example", cmd_witness_make_example, "1 - K/(k-1) |Psi_max><Psi_max|")
    p.add_argument("K", type=int)
    p.add_argument("k", type=int)
    p = leaf(wit, "canonical", cmd_witness_canonical, "canonical witness of an edge state")
    p.add_argument("file")
    p.add_argument("--k", type=int, default=2, help="witness class")
    p = leaf(wit, "eval", cmd_witness_eval, "Tr(W rho)")
    p.add_argument("witness")
    p.add_argument("state")
    p = leaf(wit, "optimize", cmd_witness_optimize, "subtract a positive operator from a witness")
    p.add_argument("file")
    p.add_argument("--p-sub", help="witness-kind document holding the operator to subtract "
                                   "(default: projector off the tangent vectors)")

    edge = sub.add_parser("edge", help="edge states").add_subparsers(dest="edge_command", required=True)
    p = leaf(edge, "extract", cmd_edge_extract, "split off lower-class pure states")
    p.add_argument("file")
    p.add_argument("k", type=int)

    mp = sub.add_parser("map", help="positive maps").add_subparsers(dest="map_command", required=True)
    p = leaf(mp, "jamiolkowski", cmd_map_jamiolkowski, "Tr_A(W rho^T_A)")
    p.add_argument("witness")
    p.add_argument("state")

    p = leaf(sub, "oracle", cmd_oracle, "compare an analytic quantity with its brute-force oracle")
    p.add_argument("quantity", choices=("eta", "rank", "measure"))
    p.add_argument("file")
    p.add_argument("--trials", type=int, default=10_000, help="search evaluations for 'measure'")

    p = leaf(sub, "random", cmd_random, "seeded random state document")
    p.add_argument("kind", choices=("pure", "mixed"))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rank", type=int, default=None)
    return parser


def _command_name(args) -> str:
    parts = [args.command]
    for attr in ("witness_command", "edge_command", "map_command"):
        if getattr(args, attr, None):
            parts.append(getattr(args, attr))
    return " ".join(parts)


def run_command(argv: list[str]) -> tuple[int, str]:
    """Run one command; returns the exit code and what would be printed on stdout."""
    args = build_parser().parse_args(argv)
    try:
        ctx = _Context(args)
        results, heuristic = args.func(ctx, args)
    except (InputError, io.DocumentError, LinAlgInputError, pure.StateError,
            witnesses.WitnessError, ValueError) as exc:
        print(f"fermcorr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID, ""
    except ConvergenceError as exc:
        print(f"fermcorr: error: {exc}", file=sys.stderr)
        return EXIT_HEURISTIC, ""
    if args.output and "document" in results:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(io.emit_document(results["document"]))
    report = io.AnalysisReport(
        command=_command_name(args), inputs=ctx.inputs, seed=ctx.seed,
        tolerances={"tol": args.tol, "budget": args.budget}, results=results,
        heuristic=heuristic, version=_version())
    return (EXIT_HEURISTIC if heuristic else EXIT_OK), io.emit_report(report, args.format)


def main(argv: list[str] | None = None) -> int:
    code, text = run_command(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
