"""Synthetic redundancy benchmark.

Each group is one class-correlated latent signal copied into several
features with small jitter; noise features are independent of the label.
With the default ``separation`` of 0.5 two groups correlate at about
0.2 through the shared label.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset
from .errors import ValidationError
from .feature_graph import similarity_matrix

MIN_GROUP_SIMILARITY = 0.95


def make_redundant(groups: int = 5, group_size: int = 5, noise: int = 25,
                   patterns: int = 400, seed: int = 0, separation: float = 0.5,
                   jitter: float = 0.1) -> Dataset:
    if groups < 1:
        raise ValidationError("need at least one group")
    if group_size < 2:
        raise ValidationError("group size must be >= 2")
    if noise < 0:
        raise ValidationError("noise feature count must be >= 0")
    if patterns < 6:
        raise ValidationError("need at least 6 patterns")
    rng = np.random.default_rng(seed)
    labels = np.arange(patterns) % 2
    labels = rng.permutation(labels)
    sign = 2.0 * labels - 1.0

    columns = []
    names = []
    for g in range(groups):
        latent = separation * sign + rng.standard_normal(patterns)
        for member in range(group_size):
            columns.append(latent + jitter * rng.standard_normal(patterns))
            names.append(f"g{g}_{member}")
    for j in range(noise):
        columns.append(rng.standard_normal(patterns))
        names.append(f"noise{j}")

    x = np.column_stack(columns)
    for g in range(groups):
        block = similarity_matrix(x[:, g * group_size:(g + 1) * group_size])
        if block.min() <= MIN_GROUP_SIMILARITY:
            raise ValidationError(
                f"group {g} min |pearson| {block.min():.3f} <= {MIN_GROUP_SIMILARITY}; "
                "increase patterns or lower jitter"
            )
    return Dataset(x, labels, tuple(names), ("0", "1"))


def group_of(name: str) -> int | None:
    """Group index encoded in a synthetic feature name, ``None`` for noise."""
    if name.startswith("g") and "_" in name:
        return int(name[1:name.index("_")])
    return None


def csv_text(d: Dataset) -> str:
    lines = [",".join(d.feature_names) + ",label"]
    for row, label in zip(d.features, d.labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{d.class_names[label]}")
    return "\n".join(lines) + "\n"
