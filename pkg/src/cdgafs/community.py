"""Louvain modularity optimisation on dense weighted graphs.

Graphs are symmetric non-negative matrices. Diagonal entries are treated
as self-loops, which is how aggregated community graphs carry their
internal weight; :func:`detect_communities` and :func:`modularity` drop
the diagonal of a :class:`FeatureGraph` before use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .feature_graph import FeatureGraph

# Moves must improve Q by more than this; guards against roundoff cycling.
MIN_GAIN = 1e-12


@dataclass(frozen=True)
class Phase:
    level: int
    sweep: int
    moves: int
    modularity: float


@dataclass(frozen=True)
class Partition:
    assignment: np.ndarray
    k: int
    modularity: float
    trace: tuple[Phase, ...] = field(default=(), repr=False, compare=False)

    def members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == c) for c in range(self.k)]

    def sizes(self) -> list[int]:
        return np.bincount(self.assignment, minlength=self.k).tolist()


def relabel(assignment) -> np.ndarray:
    """Dense community ids in order of first appearance."""
    assignment = np.asarray(assignment)
    _, first, inverse = np.unique(assignment, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse.ravel()]


def _as_matrix(g) -> np.ndarray:
    if isinstance(g, FeatureGraph):
        return g.offdiagonal()
    w = np.array(g, dtype=float)
    np.fill_diagonal(w, 0.0)
    return w


def modularity_matrix(adjacency: np.ndarray, assignment) -> float:
    """Newman modularity of ``assignment`` on ``adjacency`` (self-loops kept)."""
    a = np.asarray(adjacency, dtype=float)
    labels = relabel(assignment)
    total = a.sum()
    if a.size == 0 or total <= 0:
        raise ValidationError("modularity is undefined on a graph without edges")
    if labels.size != a.shape[0]:
        raise ValidationError("assignment does not cover every node")
    onehot = np.zeros((labels.size, labels.max() + 1))
    onehot[np.arange(labels.size), labels] = 1.0
    internal = np.einsum("ic,ij,jc->", onehot, a, onehot)
    degree_sums = onehot.T @ a.sum(axis=1)
    return float(internal / total - (degree_sums**2).sum() / total**2)


def modularity(g, part) -> float:
    """Modularity over off-diagonal weights of ``g``.

    ``g`` is a :class:`FeatureGraph` or a square matrix; ``part`` is a
    :class:`Partition` or a sequence of community ids.
    """
    assignment = part.assignment if isinstance(part, Partition) else part
    return modularity_matrix(_as_matrix(g), assignment)


def aggregate(adjacency: np.ndarray, assignment) -> np.ndarray:
    """Collapse each community into one node; internal weight becomes a self-loop."""
    labels = relabel(assignment)
    onehot = np.zeros((labels.size, labels.max() + 1))
    onehot[np.arange(labels.size), labels] = 1.0
    return onehot.T @ np.asarray(adjacency, dtype=float) @ onehot


def local_moving(adjacency: np.ndarray, rng: np.random.Generator, level: int = 0,
                 original: np.ndarray | None = None, lift=None):
    """Greedy node moves until a full sweep makes no move.

    Returns the community labels and one :class:`Phase` per sweep. When
    ``original`` and ``lift`` (original node -> current node) are given,
    each phase records Q of the lifted partition on ``original``, so an
    unchanged partition reports a bit-identical Q at every level.
    """
    a = np.asarray(adjacency, dtype=float)
    n = a.shape[0]
    two_m = a.sum()
    m = two_m / 2.0
    strength = a.sum(axis=1)
    labels = np.arange(n)
    # link[i, c]: weight from node i into community c, self-loop excluded
    offdiag = a.copy()
    np.fill_diagonal(offdiag, 0.0)
    link = offdiag.copy()
    totals = strength.copy()

    phases = []
    sweep = 0
    while True:
        moves = 0
        for i in rng.permutation(n):
            own = labels[i]
            totals[own] -= strength[i]
            base = link[i, own] / m - strength[i] * totals[own] / (2.0 * m * m)
            gains = link[i] / m - strength[i] * totals / (2.0 * m * m)
            gains[own] = -np.inf
            gains[link[i] <= 0] = -np.inf
            best = int(np.argmax(gains))
            target = own
            if gains[best] - base > MIN_GAIN:
                target = best
                moves += 1
                link[:, own] -= offdiag[:, i]
                link[:, target] += offdiag[:, i]
                labels[i] = target
            totals[target] += strength[i]
        sweep += 1
        if original is None:
            q = modularity_matrix(a, relabel(labels))
        else:
            q = modularity_matrix(original, relabel(labels[lift]))
        phases.append(Phase(level, sweep, moves, q))
        if moves == 0:
            return relabel(labels), phases


def louvain(adjacency: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, list[Phase]]:
    """Two-phase Louvain on a matrix; returns dense labels and the phase trace."""
    a = np.asarray(adjacency, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("adjacency must be square")
    n = a.shape[0]
    original = a
    assignment = np.arange(n)
    phases = [Phase(0, 0, 0, modularity_matrix(a, assignment))]
    level = 0
    while True:
        labels, level_phases = local_moving(a, rng, level, original, assignment)
        phases.extend(level_phases)
        if labels.max() + 1 == a.shape[0]:
            return relabel(assignment), phases
        assignment = labels[assignment]
        a = aggregate(a, labels)
        level += 1


def detect_communities(g, seed: int | np.random.Generator = 0) -> Partition:
    """Louvain partition of a feature graph; node visit order is seeded."""
    w = _as_matrix(g)
    if w.shape[0] < 2:
        raise ValidationError("community detection needs at least two nodes")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if w.sum() <= 0:
        raise ValidationError("graph has no edges")
    assignment, phases = louvain(w, rng)
    q = modularity_matrix(w, assignment)
    return Partition(assignment, int(assignment.max()) + 1, q, tuple(phases))


DETECTORS = {"louvain": detect_communities}


def get_detector(name: str):
    try:
        return DETECTORS[name]
    except KeyError:
        raise ValidationError(
            f"unknown community detector {name!r}; available: {sorted(DETECTORS)}"
        ) from None
