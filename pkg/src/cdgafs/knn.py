"""Brute-force k-nearest-neighbour classification on feature subsets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ValidationError

DEFAULT_K = 5
# Queries per distance block; bounds the (queries, train, features) temporary.
_BLOCK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class SubsetView:
    """A dataset seen through a subset of its columns."""

    source: Dataset
    selected: tuple[int, ...]

    def __post_init__(self):
        selected = tuple(sorted(int(i) for i in self.selected))
        if not selected:
            raise ValidationError("feature subset is empty")
        if len(set(selected)) != len(selected):
            raise ValidationError("feature subset has duplicate indices")
        if selected[0] < 0 or selected[-1] >= self.source.n_features:
            raise ValidationError("feature subset index out of range")
        object.__setattr__(self, "selected", selected)

    @property
    def matrix(self) -> np.ndarray:
        return self.source.features[:, list(self.selected)]

    @property
    def labels(self) -> np.ndarray:
        return self.source.labels


def check_k(k_nn: int, n_train: int) -> None:
    if k_nn < 1:
        raise ValidationError(f"k_nn must be >= 1, got {k_nn}")
    if n_train == 0:
        raise ValidationError("training set is empty")
    if k_nn > n_train:
        raise ValidationError(f"k_nn={k_nn} exceeds training size {n_train}")


def nearest_mask(dist: np.ndarray, k_nn: int) -> np.ndarray:
    """Boolean mask of the ``k_nn`` nearest columns per row.

    Equal distances at the boundary are filled by ascending column index,
    which matches a stable sort without paying for one.
    """
    kth = np.partition(dist, k_nn - 1, axis=1)[:, k_nn - 1:k_nn]
    closer = dist < kth
    need = k_nn - closer.sum(axis=1, keepdims=True)
    tied = dist == kth
    if np.array_equal(tied.sum(axis=1, keepdims=True), need):
        return closer | tied
    return closer | (tied & (np.cumsum(tied, axis=1) <= need))


def vote(dist: np.ndarray, train_y: np.ndarray, k_nn: int, n_classes: int) -> np.ndarray:
    """Majority label among the ``k_nn`` nearest columns of each ``dist`` row."""
    if k_nn == 1:
        return train_y[dist.argmin(axis=1)]
    onehot = np.zeros((train_y.size, n_classes), dtype=np.int64)
    onehot[np.arange(train_y.size), train_y] = 1
    votes = nearest_mask(dist, k_nn).astype(np.int64) @ onehot
    # argmax returns the first maximum: the smallest class id wins a tied vote
    return votes.argmax(axis=1)


def predict_many(train_x: np.ndarray, train_y: np.ndarray, queries: np.ndarray,
                 k_nn: int, n_classes: int | None = None) -> np.ndarray:
    """Predict a label for every row of ``queries``.

    Distances are squared Euclidean, computed as explicit sums of squared
    differences so that equal distances compare equal. Distance ties go
    to the lower training index.
    """
    check_k(k_nn, train_x.shape[0])
    if n_classes is None:
        n_classes = int(train_y.max()) + 1
    out = np.empty(queries.shape[0], dtype=np.int64)
    block = max(1, _BLOCK_ELEMENTS // max(1, train_x.size))
    for start in range(0, queries.shape[0], block):
        q = queries[start:start + block]
        diff = q[:, None, :] - train_x[None, :, :]
        dist = np.einsum("qtf,qtf->qt", diff, diff)
        out[start:start + block] = vote(dist, train_y, k_nn, n_classes)
    return out


def knn_predict(train: SubsetView, query, k_nn: int = DEFAULT_K) -> int:
    """Class id for a single pattern ``query``.

    ``query`` is either a full-width pattern of the training source or a
    vector already restricted to ``train.selected``.
    """
    query = np.asarray(query, dtype=float)
    if query.shape == (train.source.n_features,):
        query = query[list(train.selected)]
    elif query.shape != (len(train.selected),):
        raise ValidationError("query width matches neither the dataset nor the subset")
    return int(predict_many(train.matrix, train.labels, query[None, :], k_nn,
                            train.source.class_count)[0])


def classification_accuracy(train: SubsetView, evaluation: SubsetView,
                            k_nn: int = DEFAULT_K) -> float:
    if train.selected != evaluation.selected:
        raise ValidationError("train and evaluation views select different features")
    if evaluation.source.n_patterns == 0:
        raise ValidationError("evaluation set is empty")
    n_classes = max(train.source.class_count, int(train.labels.max()) + 1)
    predicted = predict_many(train.matrix, train.labels, evaluation.matrix, k_nn, n_classes)
    return float(np.mean(predicted == evaluation.labels))
