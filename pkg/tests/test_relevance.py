import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cdgafs.dataset import Dataset
from cdgafs.errors import ValidationError
from cdgafs.relevance import (
    filter_irrelevant,
    fisher_scores,
    normalize_scores,
    score_features,
    subset_count,
)


def make(x, y):
    x = np.asarray(x, dtype=float)
    return Dataset(x, y, tuple(f"f{j}" for j in range(x.shape[1])))


def test_identical_class_means_score_zero():
    d = make([[1.0], [3.0], [1.0], [3.0]], [0, 0, 1, 1])
    assert fisher_scores(d).tolist() == [0.0]


def test_perfect_separator_gets_cap():
    x = np.array([[0, 0.1], [0, 0.9], [1, 0.2], [1, 0.7]], dtype=float)
    d = make(x, [0, 0, 1, 1])
    scores = fisher_scores(d)
    finite = oracles.fisher([x[:, 1].tolist()], [0, 0, 1, 1])[0]
    assert scores[1] == pytest.approx(finite, abs=1e-12)
    assert scores[0] == pytest.approx(10 * finite, abs=1e-12)


def test_lone_separator_without_finite_scores():
    scores = fisher_scores(make([[0.0], [0.0], [1.0], [1.0]], [0, 0, 1, 1]))
    assert scores.tolist() == [1.0]


def test_constant_feature_scores_zero():
    scores = fisher_scores(make([[0.3, 1], [0.3, 2], [0.3, 5], [0.3, 4]], [0, 0, 1, 1]))
    assert scores[0] == 0.0


def test_repeated_inexact_value_is_treated_as_constant():
    # 0.1 * 3 / 3 != 0.1 in floating point; the class is still constant
    x = [[0.1], [0.1], [0.1], [0.7], [0.7], [0.7]]
    scores = fisher_scores(make(x, [0, 0, 0, 1, 1, 1]))
    assert scores.tolist() == [1.0]


def test_six_pattern_oracle():
    rng = np.random.default_rng(42)
    x = rng.normal(size=(6, 4))
    y = [0, 1, 0, 1, 0, 1]
    expected = oracles.fisher(x.T.tolist(), y)
    np.testing.assert_allclose(fisher_scores(make(x, y)), expected, rtol=0, atol=1e-9)


def test_single_class_rejected():
    with pytest.raises(ValidationError):
        fisher_scores(make([[1.0], [2.0]], [0, 0]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-50, 50))
def test_affine_invariance(seed, slope, shift):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(20, 3))
    y = np.arange(20) % 3
    base = fisher_scores(make(x, y))
    moved = fisher_scores(make(x * slope + shift, y))
    np.testing.assert_allclose(moved, base, rtol=1e-9, atol=1e-9)
    assert (base >= 0).all()


class TestNormalize:
    def test_mean_maps_to_half(self):
        assert normalize_scores([1.0, 2.0, 3.0])[1] == 0.5

    def test_all_equal(self):
        assert normalize_scores([4.0, 4.0, 4.0]).tolist() == [0.5] * 3

    def test_two_scores(self):
        expected = [1 / (1 + math.e), 1 / (1 + math.exp(-1))]
        np.testing.assert_allclose(normalize_scores([0.0, 2.0]), expected, atol=1e-15)

    def test_oracle(self):
        raw = [0.3, 1.7, 0.2, 5.0]
        expected = [oracles.logistic(v, raw) for v in raw]
        np.testing.assert_allclose(normalize_scores(raw), expected, atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 10**6), min_size=2, max_size=30, unique=True))
    def test_strictly_monotone(self, ticks):
        raw = np.array(ticks) / 1000.0
        norm = normalize_scores(raw)
        order_raw = np.argsort(raw)
        assert (np.diff(norm[order_raw]) > 0).all()
        assert ((norm > 0) & (norm < 1)).all()


class TestFilter:
    def test_keeps_all_when_small(self):
        raw = np.random.default_rng(0).random(60)
        assert sorted(filter_irrelevant(raw, 100)) == list(range(60))

    def test_top_m(self):
        raw = np.random.default_rng(1).random(279)
        kept = filter_irrelevant(raw, 100)
        assert len(kept) == 100
        dropped = sorted(set(range(279)) - set(kept))
        assert raw[list(kept)].min() >= raw[dropped].max()

    def test_tie_broken_by_index(self):
        assert filter_irrelevant([3, 1, 3], 2) == (0, 2)

    def test_descending_order(self):
        assert filter_irrelevant([1, 5, 3, 5], 4) == (1, 3, 2, 0)

    def test_cap_too_small(self):
        with pytest.raises(ValidationError):
            filter_irrelevant([1, 2, 3], 1)

    def test_score_features_bundle(self):
        rng = np.random.default_rng(3)
        d = make(rng.normal(size=(30, 5)), np.arange(30) % 2)
        s = score_features(d, 3)
        assert len(s.kept_indices) == 3
        assert s.raw.shape == s.normalized.shape == (5,)


@pytest.mark.parametrize("n, expected", [(0, 1), (3, 8), (57, 144115188075855872)])
def test_subset_count(n, expected):
    assert subset_count(n) == expected


def test_subset_count_matches_binomial_sum():
    assert subset_count(12) == sum(math.comb(12, r) for r in range(13))
