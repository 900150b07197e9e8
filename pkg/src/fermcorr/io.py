"""JSON state documents and analysis reports.

A document looks like::

    {"schema_version": "1.0", "kind": "pure", "k": 2,
     "data": [{"a": 1, "b": 2, "re": 0.5, "im": 0.0}], "metadata": {}}

Pure documents list upper-triangle entries of ``w`` with 1-based modes.
Mixed and witness documents hold a dense hermitian matrix as a row-major
list of ``{"re", "im"}`` objects; a mixed document may also live on the
full space ``C^2K (x) C^2K`` (for the Jamiolkowski map), recognized by
its size.  Floats are written with ``repr`` so that parsing returns the
same bits.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import basis
from .mixed import MixedState
from .pure import TwoFermionState
from .witnesses import PROVENANCES, WitnessOperator

SCHEMA_VERSION = "1.0"
KINDS = ("pure", "mixed", "witness")


class DocumentError(ValueError):
    """Malformed document; the message names the offending field."""


@dataclass(frozen=True, eq=False)
class StateDocument:
    """Parsed document; ``matrix`` is ``w`` for pure states, the dense operator otherwise."""

    kind: str
    k: int
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    @property
    def full_space(self) -> bool:
        return self.kind == "mixed" and self.matrix.shape[0] == (2 * self.k) ** 2 != basis.dim(self.k)

    def to_object(self):
        """The validated library object: a state, mixed state, witness or full-space matrix."""
        try:
            if self.kind == "pure":
                return TwoFermionState(self.matrix)
            if self.kind == "witness":
                return WitnessOperator(self.matrix, int(self.metadata.get("k_class", 2)),
                                       self.metadata.get("provenance", "user"),
                                       self.metadata.get("certified_nonneg"))
            if self.full_space:
                return _full_space_state(self.matrix)
            return MixedState(self.matrix)
        except ValueError as exc:
            raise DocumentError(f"data: {exc}") from exc


def _full_space_state(rho: np.ndarray) -> np.ndarray:
    err = float(np.abs(rho - rho.conj().T).max())
    if err > 1e-12 * max(1.0, float(np.abs(rho).max())):
        raise DocumentError(f"data: matrix is not hermitian (deviation {err:.3e})")
    return (rho + rho.conj().T) / 2


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise DocumentError(f"{where}: missing field '{key}'")
    return obj[key]


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise DocumentError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _complex_entry(entry, where: str) -> complex:
    if not isinstance(entry, dict):
        raise DocumentError(f"{where}: expected an object with 're' and 'im'")
    return complex(_number(_require(entry, "re", where), f"{where}.re"),
                   _number(entry.get("im", 0.0), f"{where}.im"))


def _parse_pure(data, k: int) -> np.ndarray:
    n = 2 * k
    w = np.zeros((n, n), dtype=complex)
    seen = set()
    if not isinstance(data, list):
        raise DocumentError("data: expected a list of {a, b, re, im} entries")
    for i, entry in enumerate(data):
        where = f"data[{i}]"
        if not isinstance(entry, dict):
            raise DocumentError(f"{where}: expected an object")
        a = _require(entry, "a", where)
        b = _require(entry, "b", where)
        if not (isinstance(a, int) and isinstance(b, int)) or isinstance(a, bool) or isinstance(b, bool):
            raise DocumentError(f"{where}: mode indices must be integers")
        if a == b:
            raise DocumentError(f"{where}: diagonal entry violates antisymmetry")
        if not (1 <= a <= n and 1 <= b <= n):
            raise DocumentError(f"{where}: mode index out of range 1..{n}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise DocumentError(f"{where}: duplicate entry for modes {key}")
        seen.add(key)
        val = _complex_entry(entry, where)
        w[a - 1, b - 1] = val
        w[b - 1, a - 1] = -val
    return w


def _parse_dense(data, k: int, kind: str) -> np.ndarray:
    if not isinstance(data, list):
        raise DocumentError("data: expected a row-major list of {re, im} entries")
    d = basis.dim(k)
    sizes = [d] if kind == "witness" else [d, (2 * k) ** 2]
    for size in sizes:
        if len(data) == size * size:
            break
    else:
        raise DocumentError(f"data: expected {' or '.join(str(s * s) for s in sizes)} entries "
                            f"for K={k}, got {len(data)}")
    vals = np.array([_complex_entry(e, f"data[{i}]") for i, e in enumerate(data)], dtype=complex)
    return vals.reshape(size, size)


def parse_state(text: str) -> StateDocument:
    """Parse and validate a document; raises :class:`DocumentError` with a location."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise DocumentError("document: expected a JSON object")
    version = _require(obj, "schema_version", "document")
    if version != SCHEMA_VERSION:
        raise DocumentError(f"schema_version: unsupported version {version!r}")
    kind = _require(obj, "kind", "document")
    if kind not in KINDS:
        raise DocumentError(f"kind: expected one of {KINDS}, got {kind!r}")
    k = _require(obj, "k", "document")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise DocumentError(f"k: expected a positive integer, got {k!r}")
    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise DocumentError("metadata: expected an object")
    data = _require(obj, "data", "document")
    if kind == "pure":
        matrix = _parse_pure(data, k)
    else:
        matrix = _parse_dense(data, k, kind)
    if kind == "witness":
        kc = metadata.get("k_class", 2)
        if not isinstance(kc, int) or isinstance(kc, bool) or not 2 <= kc <= k:
            raise DocumentError(f"metadata.k_class: expected an integer in 2..{k}, got {kc!r}")
        prov = metadata.get("provenance", "user")
        if prov not in PROVENANCES:
            raise DocumentError(f"metadata.provenance: expected one of {PROVENANCES}, got {prov!r}")
    doc = StateDocument(kind=kind, k=k, matrix=matrix, metadata=metadata, schema_version=version)
    doc.to_object()
    return doc


def _complex_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def document_dict(doc: StateDocument) -> dict:
    if doc.kind == "pure":
        n = doc.matrix.shape[0]
        data = [{"a": a + 1, "b": b + 1, **_complex_json(doc.matrix[a, b])}
                for a in range(n) for b in range(a + 1, n) if doc.matrix[a, b] != 0]
    else:
        data = [_complex_json(z) for z in doc.matrix.ravel()]
    return {"schema_version": doc.schema_version, "kind": doc.kind, "k": doc.k,
            "data": data, "metadata": doc.metadata}


def emit_document(doc: StateDocument) -> str:
    return json.dumps(document_dict(doc), indent=1) + "\n"


def to_document(obj, metadata: dict | None = None) -> StateDocument:
    """Wrap a state, mixed state or witness in a document."""
    metadata = dict(metadata or {})
    if isinstance(obj, TwoFermionState):
        return StateDocument("pure", obj.k, np.array(obj.w), metadata)
    if isinstance(obj, MixedState):
        return StateDocument("mixed", obj.k, np.array(obj.rho), metadata)
    if isinstance(obj, WitnessOperator):
        metadata.update(k_class=obj.k_class, provenance=obj.provenance)
        if obj.certified_nonneg is not None:
            metadata["certified_nonneg"] = float(obj.certified_nonneg)
        return StateDocument("witness", obj.k, np.array(obj.op), metadata)
    raise TypeError(f"cannot make a document from {type(obj).__name__}")


def digest(raw: bytes) -> str:
    return "sha256:" + hashlib.sha256(raw).hexdigest()


@dataclass
class AnalysisReport:
    """Results of one command, reproducible from its inputs, seed and version."""

    command: str
    inputs: list[str]
    seed: int
    tolerances: dict
    results: dict
    heuristic: bool = False
    version: str = ""

    def as_dict(self) -> dict:
        return {"command": self.command, "version": self.version, "inputs": self.inputs,
                "seed": self.seed, "tolerances": self.tolerances, "heuristic": self.heuristic,
                "results": self.results}


def jsonable(x: Any):
    """Numbers, arrays and documents in JSON form; complex values become ``{re, im}``."""
    if isinstance(x, StateDocument):
        return document_dict(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return _complex_json(x)
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _text_lines(prefix: str, x, out: list[str]) -> None:
    if isinstance(x, dict) and not set(x) <= {"re", "im"}:
        for k, v in x.items():
            _text_lines(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(x, list) and x and all(isinstance(v, (dict, list)) for v in x):
        for i, v in enumerate(x):
            _text_lines(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix}: {json.dumps(x)}")


def emit_report(report: AnalysisReport, fmt: str = "json") -> str:
    body = jsonable(report.as_dict())
    if fmt == "json":
        return json.dumps(body, indent=2) + "\n"
    if fmt == "text":
        out: list[str] = []
        _text_lines("", body, out)
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


__all__ = [
    "AnalysisReport", "DocumentError", "SCHEMA_VERSION", "StateDocument",
    "digest", "document_dict", "emit_document", "emit_report", "jsonable", "parse_state", "to_document",
]
