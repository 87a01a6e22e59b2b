import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cdgafs.dataset import Dataset
from cdgafs.errors import ValidationError
from cdgafs.feature_graph import build_graph, graph_csv, pearson_similarity, similarity_matrix


def make(x):
    x = np.asarray(x, dtype=float)
    return Dataset(x, np.arange(x.shape[0]) % 2, tuple(f"f{j}" for j in range(x.shape[1])))


class TestPearson:
    def test_self(self):
        x = [0.3, 1.2, -0.4, 2.0]
        assert pearson_similarity(x, x) == pytest.approx(1.0, abs=1e-15)

    def test_negated(self):
        x = np.array([0.3, 1.2, -0.4, 2.0])
        assert pearson_similarity(x, -x + 5) == pytest.approx(1.0, abs=1e-15)

    def test_known_value(self):
        expected = oracles.pearson_abs([1, 2, 3, 4], [1, 3, 2, 4])
        assert expected == pytest.approx(0.8, abs=1e-15)
        assert pearson_similarity([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(expected, abs=1e-12)

    def test_constant_is_zero(self):
        assert pearson_similarity([2, 2, 2], [1, 2, 3]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            pearson_similarity([1, 2, 3], [1, 2])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-100, 100))
    def test_affine_invariance(self, seed, slope, shift):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 15))
        assert pearson_similarity(x * slope + shift, y) == pytest.approx(
            pearson_similarity(x, y), abs=1e-9)


class TestBuildGraph:
    def test_identical_features(self):
        x = np.array([[1.0, 1.0], [2.0, 2.0], [4.0, 4.0]])
        g = build_graph(make(x), [0, 1])
        np.testing.assert_allclose(g.raw_weights, [[1, 1], [1, 1]], atol=1e-12)

    def test_equal_similarities_scale_to_half(self):
        # three features with identical pairwise |r|
        x = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float)
        g = build_graph(make(x), [0, 1, 2])
        assert np.ptp(g.raw_weights[~np.eye(3, dtype=bool)]) == 0
        off = g.weights[~np.eye(3, dtype=bool)]
        assert np.all(off == 0.5)

    def test_oracle_entries(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(25, 5))
        g = build_graph(make(x), range(5))
        cols = x.T.tolist()
        off = [oracles.pearson_abs(cols[i], cols[j]) for i in range(5) for j in range(5) if i != j]
        for i in range(5):
            for j in range(5):
                if i == j:
                    assert g.raw_weights[i, j] == 1.0
                    continue
                raw = oracles.pearson_abs(cols[i], cols[j])
                assert g.raw_weights[i, j] == pytest.approx(raw, abs=1e-9)
                assert g.weights[i, j] == pytest.approx(oracles.logistic(raw, off), abs=1e-9)

    def test_kept_subset_maps_node_ids(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(20, 6))
        g = build_graph(make(x), [4, 1, 3])
        assert g.node_ids == (4, 1, 3)
        assert g.raw_weights[0, 1] == pytest.approx(oracles.pearson_abs(x[:, 4], x[:, 1]), abs=1e-12)

    def test_symmetric_and_deterministic(self):
        x = np.random.default_rng(8).normal(size=(30, 7))
        a = build_graph(make(x), range(7))
        b = build_graph(make(x), range(7))
        np.testing.assert_array_equal(a.weights, a.weights.T)
        np.testing.assert_array_equal(a.raw_weights, a.raw_weights.T)
        assert a.weights.tobytes() == b.weights.tobytes()
        assert ((a.weights > 0) & (a.weights < 1)).all()

    def test_permutation_equivariance(self):
        x = np.random.default_rng(11).normal(size=(30, 6))
        perm = [3, 0, 5, 1, 4, 2]
        base = build_graph(make(x), range(6))
        moved = build_graph(make(x), perm)
        np.testing.assert_allclose(moved.raw_weights, base.raw_weights[np.ix_(perm, perm)], atol=1e-12)
        np.testing.assert_allclose(moved.weights, base.weights[np.ix_(perm, perm)], atol=1e-12)

    def test_needs_two_features(self):
        with pytest.raises(ValidationError):
            build_graph(make(np.ones((3, 2))), [0])

    def test_constant_column_row_is_zero(self):
        x = np.column_stack([np.ones(5), np.arange(5.0), np.arange(5.0) ** 2])
        sim = similarity_matrix(x)
        assert sim[0, 1] == sim[0, 2] == 0.0
        assert sim[0, 0] == 1.0


def test_graph_csv_layout():
    x = np.random.default_rng(1).normal(size=(10, 3))
    d = make(x)
    text = graph_csv(build_graph(d, [0, 2]), d.feature_names)
    lines = text.strip().split("\n")
    assert lines[0] == ",f0,f2"
    assert lines[1].startswith("f0,") and len(lines[1].split(",")) == 3
