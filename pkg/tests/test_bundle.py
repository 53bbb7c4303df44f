import json

import numpy as np
import pytest

from driftparse.bundle import (
    FORMAT_VERSION,
    BundleError,
    ModelBundle,
    bundle_to_document,
    document_to_bundle,
    load_bundle,
    save_bundle,
)


def doc_of(bundle):
    return json.loads(json.dumps(bundle_to_document(bundle)))


class TestRoundTrip:
    def test_exact_round_trip(self, bundle_a):
        restored = document_to_bundle(doc_of(bundle_a))
        assert restored.hmm.states == bundle_a.hmm.states
        assert restored.hmm.emissions == bundle_a.hmm.emissions
        assert np.array_equal(restored.hmm.ps, bundle_a.hmm.ps)
        assert np.array_equal(restored.hmm.pt, bundle_a.hmm.pt)
        assert np.array_equal(restored.hmm.pe, bundle_a.hmm.pe)
        assert restored.pattern == bundle_a.pattern
        assert restored.mining_config == bundle_a.mining_config
        assert restored.format_version == FORMAT_VERSION

    def test_file_round_trip(self, tmp_path, bundle_a):
        path = tmp_path / "model.json"
        save_bundle(bundle_a, path)
        restored = load_bundle(path)
        assert restored.pattern == bundle_a.pattern
        assert np.array_equal(restored.hmm.pe, bundle_a.hmm.pe)

    def test_saves_are_byte_identical(self, tmp_path, bundle_a):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_bundle(bundle_a, a)
        save_bundle(bundle_a, b)
        assert a.read_bytes() == b.read_bytes()

    def test_save_load_save_is_stable(self, tmp_path, bundle_a):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_bundle(bundle_a, a)
        save_bundle(load_bundle(a), b)
        assert a.read_bytes() == b.read_bytes()


class TestValidation:
    def test_not_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{ nope")
        with pytest.raises(BundleError, match="JSON"):
            load_bundle(path)

    def test_wrong_version(self, bundle_a):
        doc = doc_of(bundle_a)
        doc["format_version"] = 99
        with pytest.raises(BundleError, match="format_version"):
            document_to_bundle(doc)

    def test_missing_field_names_path(self, bundle_a):
        doc = doc_of(bundle_a)
        del doc["hmm"]["ps"]
        with pytest.raises(BundleError, match=r"\$\.hmm\.ps"):
            document_to_bundle(doc)

    def test_bad_number_names_path(self, bundle_a):
        doc = doc_of(bundle_a)
        doc["hmm"]["ps"][0] = "not-a-number"
        with pytest.raises(BundleError, match=r"\$\.hmm\.ps"):
            document_to_bundle(doc)

    def test_ragged_matrix_names_row(self, bundle_a):
        doc = doc_of(bundle_a)
        doc["hmm"]["pt"][2] = doc["hmm"]["pt"][2][:-1]
        with pytest.raises(BundleError, match=r"\$\.hmm\.pt\[2\]"):
            document_to_bundle(doc)

    def test_broken_row_sum_rejected(self, bundle_a):
        doc = doc_of(bundle_a)
        doc["hmm"]["pe"][0][0] = "0.9999"
        with pytest.raises(BundleError, match="invalid model"):
            document_to_bundle(doc)

    def test_trigger_outside_required_rejected(self, bundle_a):
        doc = doc_of(bundle_a)
        doc["pattern"]["trigger"] = "never-mined"
        with pytest.raises(BundleError, match="invalid pattern"):
            document_to_bundle(doc)

    def test_bool_is_not_an_int(self, bundle_a):
        doc = doc_of(bundle_a)
        doc["format_version"] = True
        with pytest.raises(BundleError, match="bad type"):
            document_to_bundle(doc)
