"""Fisher-score relevance filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._scaling import logistic_scale
from .dataset import Dataset
from .errors import ValidationError

DEFAULT_FILTER_CAP = 100
# Multiplier applied to the largest finite score for perfectly separating features.
SEPARATING_CAP_FACTOR = 10.0


@dataclass(frozen=True)
class RelevanceScores:
    raw: np.ndarray
    normalized: np.ndarray
    kept_indices: tuple[int, ...]


def fisher_scores(train: Dataset) -> np.ndarray:
    """Between-class over within-class scatter, one score per feature.

    Per-class spread uses the population variance. A feature whose
    within-class scatter is exactly zero scores 0 if it is constant, and
    otherwise receives ``10 *`` the largest finite score (1.0 when no
    finite score is positive).
    """
    x = train.features
    y = train.labels
    counts = np.bincount(y, minlength=train.class_count)
    present = np.flatnonzero(counts)
    if present.size < 2:
        raise ValidationError("fisher_scores needs at least two classes")

    overall = x.mean(axis=0)
    between = np.zeros(x.shape[1])
    within = np.zeros(x.shape[1])
    within_zero = np.ones(x.shape[1], dtype=bool)
    for cls in present:
        block = x[y == cls]
        mean = block.mean(axis=0)
        between += counts[cls] * (mean - overall) ** 2
        within += counts[cls] * ((block - mean) ** 2).mean(axis=0)
        # exact test: roundoff in the mean can leave tiny non-zero variances
        within_zero &= np.ptp(block, axis=0) == 0
    constant = np.ptp(x, axis=0) == 0

    scores = np.zeros(x.shape[1])
    finite = ~within_zero
    scores[finite] = between[finite] / within[finite]
    separating = within_zero & ~constant
    if separating.any():
        top = scores[finite].max() if finite.any() else 0.0
        scores[separating] = SEPARATING_CAP_FACTOR * top if top > 0 else 1.0
    return scores


def normalize_scores(raw) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise ValidationError("normalize_scores needs at least one score")
    return logistic_scale(raw)


def filter_irrelevant(raw, m: int = DEFAULT_FILTER_CAP) -> tuple[int, ...]:
    """Indices of the ``min(m, n)`` highest scores, best first, ties by index."""
    if m < 2:
        raise ValidationError(f"filter cap must be >= 2, got {m}")
    raw = np.asarray(raw, dtype=float)
    order = np.lexsort((np.arange(raw.size), -raw))
    return tuple(int(i) for i in order[:m])


def score_features(train: Dataset, m: int = DEFAULT_FILTER_CAP) -> RelevanceScores:
    raw = fisher_scores(train)
    return RelevanceScores(raw, normalize_scores(raw), filter_irrelevant(raw, m))


def subset_count(n: int) -> int:
    """Number of candidate feature subsets over ``n`` features."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    return 1 << n
