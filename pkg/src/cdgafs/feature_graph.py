"""Complete feature-similarity graph from absolute Pearson correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._scaling import logistic_scale
from .dataset import Dataset
from .errors import ValidationError


@dataclass(frozen=True)
class FeatureGraph:
    """Dense similarity graph over a kept feature set.

    ``node_ids[i]`` is the original feature index of node ``i``. The
    diagonal of ``raw_weights`` is 1; the diagonal of ``weights`` is the
    scaled image of 1 and is ignored by modularity.
    """

    node_ids: tuple[int, ...]
    weights: np.ndarray
    raw_weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.node_ids)

    def offdiagonal(self) -> np.ndarray:
        w = self.weights.copy()
        np.fill_diagonal(w, 0.0)
        return w


def pearson_similarity(x_i, x_j) -> float:
    """Absolute Pearson correlation; 0 when either vector is constant."""
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if x_i.shape != x_j.shape or x_i.ndim != 1:
        raise ValidationError("pearson_similarity needs two vectors of equal length")
    if x_i.size < 2:
        raise ValidationError("pearson_similarity needs at least two samples")
    return float(similarity_matrix(np.column_stack([x_i, x_j]))[0, 1])


def similarity_matrix(x: np.ndarray) -> np.ndarray:
    """|Pearson| between all column pairs of ``x``; unit diagonal."""
    x = np.asarray(x, dtype=float)
    centered = x - x.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    constant = np.ptp(x, axis=0) == 0
    safe = np.where(constant, 1.0, norms)
    unit = centered / safe
    sim = np.abs(unit.T @ unit)
    sim[constant, :] = 0.0
    sim[:, constant] = 0.0
    np.clip(sim, 0.0, 1.0, out=sim)
    # symmetrize exactly; the matmul is not guaranteed bit-symmetric
    sim = np.triu(sim, 1)
    sim = sim + sim.T
    np.fill_diagonal(sim, 1.0)
    return sim


def build_graph(train: Dataset, kept) -> FeatureGraph:
    """Graph over ``kept`` features with logistic-scaled edge weights.

    Scaling statistics are taken over the off-diagonal entries only.
    """
    kept = tuple(int(k) for k in kept)
    if len(kept) < 2:
        raise ValidationError("build_graph needs at least two features")
    raw = similarity_matrix(train.features[:, list(kept)])
    off = ~np.eye(len(kept), dtype=bool)
    weights = logistic_scale(raw, reference=raw[off])
    raw.setflags(write=False)
    weights.setflags(write=False)
    return FeatureGraph(kept, weights, raw)


def graph_csv(graph: FeatureGraph, names=None) -> str:
    """Scaled weight matrix as CSV text with feature names on both axes."""
    labels = [names[i] if names else f"f{i}" for i in graph.node_ids]
    lines = ["," + ",".join(labels)]
    for label, row in zip(labels, graph.weights):
        lines.append(label + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
