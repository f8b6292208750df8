"""Feature propagation and profit matrix assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgalign.adjacency import AdjacencyKind, build_adjacency
from kgalign.features import FeatureMatrix
from kgalign.kg import KnowledgeGraph
from kgalign.propagation import (MAX_DEPTH, ProfitMatrix, PropagationConfig,
                                 objective_value, profit_matrix, propagate)


def _profit_oracle(prop_s, prop_t, weights=None):
    """Dense reference: X = sum_l w_l S_l T_l^T in float64."""
    depth = len(prop_s)
    if weights is None:
        weights = [1.0] * depth
    out = np.zeros((prop_s[0].rows, prop_t[0].rows))
    for w, s, t in zip(weights, prop_s, prop_t):
        out += w * (s.data.astype(np.float64) @ t.data.astype(np.float64).T)
    return out


def _random_instance(seed, n=9, d=4, depth=2):
    rng = np.random.default_rng(seed)
    triples = [(int(rng.integers(0, n)), 0, int(rng.integers(0, n))) for _ in range(2 * n)]
    triples.append((0, 0, 1 % n))
    kg = KnowledgeGraph.from_triples(np.array(triples, dtype=np.int64))
    adj = build_adjacency(kg, AdjacencyKind.RANDOM_WALK)
    feats = FeatureMatrix(rng.standard_normal((kg.entity_count, d)))
    return adj, feats


class TestPropagate:
    def test_depth_zero_returns_input(self):
        adj, feats = _random_instance(0)
        out = propagate(adj, feats, 0)
        assert len(out) == 1
        assert out[0] is feats

    def test_matches_dense_powers(self):
        """Each level equals the dense A^l H product."""
        adj, feats = _random_instance(1, depth=3)
        out = propagate(adj, feats, 3)
        dense = adj.toarray()
        expected = feats.data.copy()
        for level in range(1, 4):
            expected = dense @ expected
            np.testing.assert_allclose(out[level].data, expected, atol=1e-10)

    def test_size_mismatch_rejected(self):
        adj, _ = _random_instance(2)
        with pytest.raises(ValueError):
            propagate(adj, FeatureMatrix(np.zeros((adj.size + 1, 3))), 1)

    def test_depth_out_of_range(self):
        adj, feats = _random_instance(3)
        with pytest.raises(ValueError):
            propagate(adj, feats, MAX_DEPTH + 1)
        with pytest.raises(ValueError):
            propagate(adj, feats, -1)

    def test_float32_stays_float32(self):
        adj, feats = _random_instance(4)
        feats32 = FeatureMatrix(feats.data.astype(np.float32))
        out = propagate(adj, feats32, 2)
        assert all(level.data.dtype == np.float32 for level in out)


class TestPropagationConfig:
    def test_defaults(self):
        cfg = PropagationConfig()
        assert cfg.depth == 2

    def test_weight_arity_checked(self):
        with pytest.raises(ValueError):
            PropagationConfig(depth=2, depth_weights=(1.0, 1.0))

    def test_depth_range_checked(self):
        with pytest.raises(ValueError):
            PropagationConfig(depth=MAX_DEPTH + 1)


class TestProfitMatrix:
    def _props(self, seed, n_s=8, n_t=6, d=5, depth=2, dtype=np.float64):
        rng = np.random.default_rng(seed)
        prop_s = [FeatureMatrix(rng.standard_normal((n_s, d)).astype(dtype))
                  for _ in range(depth + 1)]
        prop_t = [FeatureMatrix(rng.standard_normal((n_t, d)).astype(dtype))
                  for _ in range(depth + 1)]
        return prop_s, prop_t

    def test_matches_dense_oracle(self):
        prop_s, prop_t = self._props(0)
        x = profit_matrix(prop_s, prop_t)
        np.testing.assert_allclose(x.data, _profit_oracle(prop_s, prop_t), atol=1e-12)
        assert x.depth_used == 2
        assert x.rows == 8 and x.cols == 6
        assert x.source_count == 8 and x.target_count == 6

    def test_row_blocks_equal_monolithic(self):
        prop_s, prop_t = self._props(1)
        full = profit_matrix(prop_s, prop_t)
        for block in (1, 3, 100):
            strip = profit_matrix(prop_s, prop_t, row_block=block)
            # GEMM reorders sums across strip shapes; equality is to rounding.
            np.testing.assert_allclose(strip.data, full.data, atol=1e-12)

    def test_depth_weights_applied(self):
        prop_s, prop_t = self._props(2)
        weights = (1.0, 0.5, 2.0)
        x = profit_matrix(prop_s, prop_t, depth_weights=weights)
        np.testing.assert_allclose(x.data, _profit_oracle(prop_s, prop_t, weights),
                                   atol=1e-12)

    def test_weight_arity_rejected(self):
        prop_s, prop_t = self._props(3)
        with pytest.raises(ValueError):
            profit_matrix(prop_s, prop_t, depth_weights=(1.0,))

    def test_depth_mismatch_rejected(self):
        prop_s, prop_t = self._props(4)
        with pytest.raises(ValueError):
            profit_matrix(prop_s[:2], prop_t)

    def test_dimension_mismatch_rejected(self):
        prop_s, _ = self._props(5)
        _, prop_t = self._props(5, d=3)
        with pytest.raises(ValueError):
            profit_matrix(prop_s, prop_t)

    def test_float32_inputs_accumulate_in_float64(self):
        """float32 inputs yield a float32 result whose values match the float64
        reference to float32 precision, not to accumulated float32 error."""
        prop_s, prop_t = self._props(6, n_s=50, n_t=50, d=40, dtype=np.float32)
        x = profit_matrix(prop_s, prop_t)
        assert x.data.dtype == np.float32
        oracle = _profit_oracle(prop_s, prop_t)
        np.testing.assert_allclose(x.data, oracle, rtol=1e-5, atol=1e-5)

    def test_out_dtype_override(self):
        prop_s, prop_t = self._props(7, dtype=np.float32)
        x = profit_matrix(prop_s, prop_t, out_dtype=np.float64)
        assert x.data.dtype == np.float64


class TestObjectiveValue:
    def test_hand_case(self):
        """Single depth, 2 entities: mismatch of swapped rows."""
        s = [FeatureMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))]
        t = [FeatureMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))]
        assert objective_value([0, 1], s, t) == 0.0
        assert objective_value([1, 0], s, t) == pytest.approx(4.0)

    def test_requires_total_mapping(self):
        s = [FeatureMatrix(np.zeros((2, 2)))]
        with pytest.raises(ValueError):
            objective_value([0, None], s, s)

    def test_requires_bijection(self):
        s = [FeatureMatrix(np.zeros((2, 2)))]
        with pytest.raises(ValueError):
            objective_value([0, 0], s, s)

    def test_requires_balanced(self):
        s = [FeatureMatrix(np.zeros((2, 2)))]
        t = [FeatureMatrix(np.zeros((3, 2)))]
        with pytest.raises(ValueError):
            objective_value([0, 1], s, t)


class TestMismatchProfitIdentity:
    """The link the solver relies on: total squared mismatch is an affine
    function of total profit, constant = sum of squared norms."""

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 5), st.integers(0, 3))
    def test_identity(self, seed, n, depth):
        rng = np.random.default_rng(seed)
        prop_s = [FeatureMatrix(rng.standard_normal((n, 3))) for _ in range(depth + 1)]
        prop_t = [FeatureMatrix(rng.standard_normal((n, 3))) for _ in range(depth + 1)]
        x = profit_matrix(prop_s, prop_t)
        const = sum(float(np.sum(m.data ** 2)) for m in prop_s + prop_t)
        perm = rng.permutation(n)
        mismatch = objective_value(perm.tolist(), prop_s, prop_t)
        profit = float(x.data[np.arange(n), perm].sum())
        assert mismatch == pytest.approx(const - 2.0 * profit, abs=1e-8)


class TestPadding:
    def test_valid_extent_properties(self):
        x = ProfitMatrix(data=np.zeros((4, 4)), depth_used=1, valid_rows=3, valid_cols=2)
        assert x.source_count == 3
        assert x.target_count == 2
        assert x.rows == 4 and x.cols == 4
