"""Word-vector and character-bigram feature construction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgalign.features import (FeatureMatrix, build_bigram_vocabulary,
                              char_bigram_features, concat_features,
                              dump_features, l2_normalize_rows, load_features,
                              name_bigrams, tokenize, word_features)
from kgalign.kg import KnowledgeGraph, WordVectorTable


def _named_kg(names):
    n = len(names)
    triples = [(i, 0, (i + 1) % n) for i in range(n)] if n > 1 else [(0, 0, 0)]
    kg = KnowledgeGraph.from_triples(np.array(triples, dtype=np.int64))
    kg.entity_names = dict(enumerate(names))
    return kg


class TestTokenize:
    def test_lowercase_and_underscores(self):
        assert tokenize("New_York City") == ["new", "york", "city"]

    def test_empty(self):
        assert tokenize("") == []


class TestBigrams:
    def test_sliding_window(self):
        assert name_bigrams("abc") == ["ab", "bc"]

    def test_lowercased(self):
        assert name_bigrams("AB") == ["ab"]

    def test_short_names(self):
        assert name_bigrams("a") == ["a"]
        assert name_bigrams("") == []

    def test_vocabulary_lexicographic(self):
        kg = _named_kg(["ba", "ab"])
        vocab = build_bigram_vocabulary(kg)
        assert list(vocab.index) == ["ab", "ba"]
        assert vocab.index["ab"] == 0


class TestCharFeatures:
    def test_counts_hand_case(self):
        """'aba' has bigrams ab, ba; 'aa' has aa. Joint vocabulary is
        [aa, ab, ba]; rows are normalized counts."""
        kg_s = _named_kg(["aba"])
        kg_t = _named_kg(["aa"])
        feats_s, feats_t, vocab = char_bigram_features(kg_s, kg_t)
        assert list(vocab.index) == ["aa", "ab", "ba"]
        np.testing.assert_allclose(feats_s.data, [[0.0, 1 / np.sqrt(2), 1 / np.sqrt(2)]])
        np.testing.assert_allclose(feats_t.data, [[1.0, 0.0, 0.0]])

    def test_repeated_bigram_counted(self):
        kg_s = _named_kg(["aaa"])  # bigram aa twice
        kg_t = _named_kg(["ab"])
        feats_s, _, vocab = char_bigram_features(kg_s, kg_t)
        assert feats_s.data[0, vocab.index["aa"]] == 1.0  # 2 / ||(2,0)||

    def test_missing_names_rejected(self):
        kg = KnowledgeGraph.from_triples(np.array([[0, 0, 1]]))
        with pytest.raises(ValueError, match="names"):
            char_bigram_features(kg, kg)

    def test_empty_name_zero_row(self):
        kg_s = _named_kg(["", "ab"])
        feats_s, _, _ = char_bigram_features(kg_s, _named_kg(["ab", "ba"]))
        np.testing.assert_array_equal(feats_s.data[0], 0.0)
        assert np.linalg.norm(feats_s.data[1]) == pytest.approx(1.0)


class TestWordFeatures:
    def _table(self):
        return WordVectorTable(dimension=2, entries={
            "new": np.array([1.0, 0.0]),
            "york": np.array([0.0, 1.0]),
        })

    def test_mean_of_known_tokens(self):
        kg = _named_kg(["New_York"])
        feats = word_features(kg, self._table())
        np.testing.assert_allclose(feats.data, [[1 / np.sqrt(2), 1 / np.sqrt(2)]])

    def test_oov_tokens_skipped(self):
        kg = _named_kg(["New_Unknownia"])
        feats = word_features(kg, self._table())
        np.testing.assert_allclose(feats.data, [[1.0, 0.0]])

    def test_all_oov_zero_row(self):
        kg = _named_kg(["Unknownia", "York"])
        feats = word_features(kg, self._table())
        np.testing.assert_array_equal(feats.data[0], 0.0)
        np.testing.assert_allclose(feats.data[1], [0.0, 1.0])

    def test_missing_names_rejected(self):
        kg = KnowledgeGraph.from_triples(np.array([[0, 0, 1]]))
        with pytest.raises(ValueError, match="names"):
            word_features(kg, self._table())

    def test_dtype(self):
        kg = _named_kg(["New"])
        assert word_features(kg, self._table(), np.float32).data.dtype == np.float32


class TestNormalize:
    def test_zero_rows_preserved(self):
        data = np.array([[0.0, 0.0], [3.0, 4.0]])
        l2_normalize_rows(data)
        np.testing.assert_array_equal(data[0], 0.0)
        np.testing.assert_allclose(np.linalg.norm(data[1]), 1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        data = rng.standard_normal((5, 4))
        once = l2_normalize_rows(data.copy())
        twice = l2_normalize_rows(once.copy())
        np.testing.assert_allclose(once, twice, atol=1e-12)


class TestConcat:
    def test_renormalized(self):
        a = FeatureMatrix(np.array([[1.0, 0.0]]))
        b = FeatureMatrix(np.array([[0.0, 1.0]]))
        merged = concat_features(a, b)
        assert merged.dimension == 4
        np.testing.assert_allclose(np.linalg.norm(merged.data[0]), 1.0)

    def test_row_mismatch_rejected(self):
        a = FeatureMatrix(np.zeros((2, 2)))
        b = FeatureMatrix(np.zeros((3, 2)))
        with pytest.raises(ValueError):
            concat_features(a, b)


class TestDumpLoad:
    def test_round_trip_exact_float32(self, tmp_path):
        rng = np.random.default_rng(1)
        feats = FeatureMatrix(rng.standard_normal((7, 5)).astype(np.float32))
        dump_features(feats, tmp_path / "f.bin")
        back = load_features(tmp_path / "f.bin")
        assert back.data.dtype == np.float32
        np.testing.assert_array_equal(back.data, feats.data)

    def test_float64_rounds_to_float32(self, tmp_path):
        feats = FeatureMatrix(np.array([[1.0 / 3.0]]))
        dump_features(feats, tmp_path / "f.bin")
        back = load_features(tmp_path / "f.bin")
        np.testing.assert_array_equal(back.data, feats.data.astype(np.float32))

    def test_truncated_payload_rejected(self, tmp_path):
        feats = FeatureMatrix(np.ones((4, 4), dtype=np.float32))
        dump_features(feats, tmp_path / "f.bin")
        blob = (tmp_path / "f.bin").read_bytes()
        (tmp_path / "cut.bin").write_bytes(blob[:-8])
        with pytest.raises(ValueError, match="truncated"):
            load_features(tmp_path / "cut.bin")

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
    def test_round_trip_property(self, tmp_path_factory, rows, dim, seed):
        tmp = tmp_path_factory.mktemp("feats")
        rng = np.random.default_rng(seed)
        feats = FeatureMatrix(rng.standard_normal((rows, dim)).astype(np.float32))
        dump_features(feats, tmp / "f.bin")
        np.testing.assert_array_equal(load_features(tmp / "f.bin").data, feats.data)
