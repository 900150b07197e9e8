import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermcorr import basis
from fermcorr.io import (
    AnalysisReport,
    DocumentError,
    emit_document,
    emit_report,
    parse_state,
    to_document,
)
from fermcorr.mixed import MixedState, random_mixed_state
from fermcorr.pure import TwoFermionState, determinant
from fermcorr.sampling import random_pure_state
from fermcorr.witnesses import WitnessOperator, example_witness


def pure_doc(entries, k=2, **extra):
    return json.dumps({"schema_version": "1.0", "kind": "pure", "k": k, "data": entries, **extra})


class TestParse:
    def test_minimal_s12(self):
        doc = parse_state(pure_doc([{"a": 1, "b": 2, "re": 0.5, "im": 0}]))
        s = doc.to_object()
        assert isinstance(s, TwoFermionState)
        assert np.array_equal(s.w, determinant(2, 0, 1).w)

    def test_im_defaults_to_zero(self):
        s = parse_state(pure_doc([{"a": 3, "b": 4, "re": 0.5}])).to_object()
        assert np.array_equal(s.w, determinant(2, 2, 3).w)

    def test_lower_entry_antisymmetrized(self):
        s = parse_state(pure_doc([{"a": 2, "b": 1, "re": 0.5, "im": 0}])).to_object()
        assert s.w[0, 1] == -0.5

    def test_diagonal_entry(self):
        with pytest.raises(DocumentError, match="diagonal entry violates antisymmetry"):
            parse_state(pure_doc([{"a": 1, "b": 1, "re": 0.5, "im": 0}]))

    @pytest.mark.parametrize("entries,msg", [
        ([{"a": 1, "b": 5, "re": 1}], "out of range"),
        ([{"a": 1, "b": 2, "re": 1}, {"a": 2, "b": 1, "re": 1}], "duplicate"),
        ([{"a": 1, "re": 1}], "missing field 'b'"),
        ([{"a": 1, "b": 2, "re": "x"}], "expected a number"),
        ([{"a": 1.5, "b": 2, "re": 1}], "integers"),
    ])
    def test_bad_entries(self, entries, msg):
        with pytest.raises(DocumentError, match=msg):
            parse_state(pure_doc(entries))

    def test_bad_json_location(self):
        with pytest.raises(DocumentError, match="line 2"):
            parse_state('{"kind":\n ]')

    @pytest.mark.parametrize("patch,msg", [
        ({"schema_version": "9"}, "schema_version"),
        ({"kind": "qubit"}, "kind"),
        ({"k": 0}, "k:"),
        ({"metadata": []}, "metadata"),
    ])
    def test_header(self, patch, msg):
        obj = {"schema_version": "1.0", "kind": "pure", "k": 2, "data": []}
        obj.update(patch)
        with pytest.raises(DocumentError, match=msg):
            parse_state(json.dumps(obj))

    def test_dense_wrong_size(self):
        obj = {"schema_version": "1.0", "kind": "mixed", "k": 2, "data": [{"re": 1}] * 35}
        with pytest.raises(DocumentError, match="36 or 256"):
            parse_state(json.dumps(obj))

    def test_nonhermitian_mixed(self):
        m = np.eye(6, dtype=complex) / 6
        m[0, 1] = 0.1
        obj = {"schema_version": "1.0", "kind": "mixed", "k": 2,
               "data": [{"re": z.real, "im": z.imag} for z in m.ravel()]}
        with pytest.raises(DocumentError, match="hermitian"):
            parse_state(json.dumps(obj))

    def test_witness_class_range(self):
        doc = json.loads(emit_document(to_document(example_witness(2, 2))))
        doc["metadata"]["k_class"] = 3
        with pytest.raises(DocumentError, match="k_class"):
            parse_state(json.dumps(doc))

    def test_full_space_mixed(self):
        rho = np.eye(16) / 16
        obj = {"schema_version": "1.0", "kind": "mixed", "k": 2, "data": [{"re": x, "im": 0.0} for x in rho.ravel()]}
        doc = parse_state(json.dumps(obj))
        assert doc.full_space and doc.to_object().shape == (16, 16)


class TestRoundTrip:
    def test_pure(self, rng):
        s = random_pure_state(3, rng)
        back = parse_state(emit_document(to_document(s))).to_object()
        assert np.array_equal(back.w, s.w)

    def test_mixed_bitwise(self, rng):
        m = random_mixed_state(2, 4, rng)
        text = emit_document(to_document(m))
        back = parse_state(text).to_object()
        assert np.array_equal(back.rho, m.rho)
        assert emit_document(parse_state(text)) == text

    def test_witness(self):
        w = example_witness(3, 2)
        back = parse_state(emit_document(to_document(w))).to_object()
        assert isinstance(back, WitnessOperator)
        assert back.k_class == 2 and back.provenance == "example"
        assert np.array_equal(back.op, w.op)

    @given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=12, max_size=12))
    def test_float_bits_property(self, xs):
        v = np.array(xs[:6]) + 1j * np.array(xs[6:])
        if not np.any(v):
            return
        s = TwoFermionState(basis.from_vector(v, 2))
        back = parse_state(emit_document(to_document(s))).to_object()
        assert np.array_equal(back.w, s.w)


class TestReport:
    def make(self):
        return AnalysisReport(command="eta", inputs=["sha256:00"], seed=3, tolerances={"tol": 1e-9},
                              results={"eta": 0.25, "z": np.array([0.5, 0.1]), "c": 1 + 2j,
                                       "doc": to_document(determinant(2, 0, 1))},
                              version="0")

    def test_json(self):
        body = json.loads(emit_report(self.make(), "json"))
        assert body["results"]["c"] == {"re": 1.0, "im": 2.0}
        assert body["results"]["z"] == [0.5, 0.1]
        assert body["results"]["doc"]["kind"] == "pure"
        assert "timestamp" not in body

    def test_text(self):
        text = emit_report(self.make(), "text")
        assert "results.eta: 0.25" in text
        assert 'results.c: {"re": 1.0, "im": 2.0}' in text

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit_report(self.make(), "xml")
