"""Loading, imputation, scaling and stratified splitting of tabular data.

Missing cells are carried as ``NaN`` in :attr:`Dataset.features` until
:func:`impute_missing` replaces them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._scaling import logistic_scale
from .errors import ParseError, ValidationError

MISSING_MARKERS = frozenset({"", "?", "na"})
DEFAULT_RATIOS = (0.6, 0.2, 0.2)


@dataclass(frozen=True)
class Dataset:
    """Pattern matrix with dense integer labels.

    Attributes
    ----------
    features : np.ndarray
        ``(p, n)`` float matrix; ``NaN`` marks a missing cell.
    labels : np.ndarray
        ``(p,)`` integer class ids in ``[0, class_count)``.
    feature_names : tuple of str
    class_names : tuple of str
        Original label strings, indexed by class id.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValidationError("features must be a 2-D matrix")
        if labels.shape != (features.shape[0],):
            raise ValidationError(
                f"labels length {labels.shape} does not match {features.shape[0]} patterns"
            )
        if len(self.feature_names) != features.shape[1]:
            raise ValidationError("feature_names length does not match feature count")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if not self.class_names:
            count = int(labels.max()) + 1 if labels.size else 0
            object.__setattr__(self, "class_names", tuple(str(c) for c in range(count)))

    @property
    def n_patterns(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    @property
    def missing_count(self) -> int:
        return int(np.isnan(self.features).sum())

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

    def take(self, rows) -> Dataset:
        """Return the sub-dataset made of ``rows`` (in the given order)."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.features[rows], self.labels[rows], self.feature_names, self.class_names
        )


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    validation: Dataset
    test: Dataset
    split_seed: int
    indices: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False, default=())


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_MARKERS


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def _label_order(values) -> list[str]:
    unique = set(values)
    numeric = {v: _parse_float(v) for v in unique}
    if all(x is not None for x in numeric.values()):
        return sorted(unique, key=lambda v: (numeric[v], v))
    return sorted(unique)


def load_csv(path, label_column: str | int | None = None) -> Dataset:
    """Read a comma-separated dataset.

    The first row is a header iff the label is selected by name, or one of
    its feature cells is neither numeric nor a missing marker.
    ``label_column`` is a header name or a 0-based index (negative indices
    allowed); it defaults to the last column. Labels are mapped to dense
    ids in sorted order (numeric order when every label parses as a
    number).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError(f"{path}: no data rows")

    first = [c.strip() for c in rows[0]]
    width = len(first)
    label_idx, named = _resolve_label_column(label_column, first, width)
    # the label cell is skipped: string class labels are not a header
    has_header = named or any(
        not _is_missing(c) and _parse_float(c) is None
        for j, c in enumerate(first) if j != label_idx
    )
    if has_header:
        header = first
        body = rows[1:]
        first_line = 2
    else:
        header = [f"f{j}" for j in range(width)]
        body = rows
        first_line = 1
    if not body:
        raise ParseError(f"{path}: header but no data rows")

    features = np.empty((len(body), width - 1), dtype=float)
    raw_labels = []
    for r, row in enumerate(body):
        line = first_line + r
        if len(row) != width:
            raise ParseError(f"expected {width} cells, found {len(row)}", row=line)
        label = row[label_idx].strip()
        if _is_missing(label):
            raise ParseError("missing class label", row=line)
        raw_labels.append(label)
        cells = row[:label_idx] + row[label_idx + 1:]
        for j, cell in enumerate(cells):
            if _is_missing(cell):
                features[r, j] = np.nan
                continue
            value = _parse_float(cell)
            if value is None or not math.isfinite(value):
                raise ParseError(f"non-numeric value {cell!r} in column {j}", row=line)
            features[r, j] = value

    classes = _label_order(raw_labels)
    if len(classes) < 2:
        raise ValidationError(f"{path}: dataset has a single class {classes[0]!r}")
    lookup = {c: i for i, c in enumerate(classes)}
    labels = np.array([lookup[v] for v in raw_labels], dtype=np.int64)
    names = header[:label_idx] + header[label_idx + 1:]
    return Dataset(features, labels, tuple(names), tuple(classes))


def _resolve_label_column(label_column, first_row, width) -> tuple[int, bool]:
    """Column index of the label and whether it was found by header name."""
    if label_column is None:
        return width - 1, False
    if isinstance(label_column, str):
        if label_column in first_row and _parse_float(label_column) is None:
            return first_row.index(label_column), True
        try:
            label_column = int(label_column)
        except ValueError:
            raise ValidationError(f"label column {label_column!r} not found") from None
    if not -width <= label_column < width:
        raise ValidationError(f"label column index {label_column} out of range")
    return label_column % width, False


def impute_missing(d: Dataset) -> Dataset:
    """Replace each missing cell with its feature's mean over observed cells."""
    x = d.features
    missing = np.isnan(x)
    if not missing.any():
        return d
    observed = (~missing).sum(axis=0)
    empty = np.flatnonzero(observed == 0)
    if empty.size:
        raise ValidationError(
            f"feature {d.feature_names[empty[0]]!r} has no observed values"
        )
    means = np.nansum(x, axis=0) / observed
    filled = np.where(missing, means, x)
    return Dataset(filled, d.labels, d.feature_names, d.class_names)


def softmax_scale(d: Dataset) -> Dataset:
    """Map every feature through the logistic of its z-score (population std).

    Constant features map to 0.5.
    """
    if np.isnan(d.features).any():
        raise ValidationError("softmax_scale requires imputed data")
    scaled = np.empty_like(d.features)
    for j in range(d.n_features):
        scaled[:, j] = logistic_scale(d.features[:, j])
    return Dataset(scaled, d.labels, d.feature_names, d.class_names)


def _part_sizes(n: int, ratios) -> list[int]:
    # Largest-remainder apportionment, then every part gets at least one pattern.
    exact = [n * r for r in ratios]
    sizes = [math.floor(e) for e in exact]
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    for i in range(len(sizes)):
        if sizes[i] == 0:
            donor = max(range(len(sizes)), key=lambda j: (sizes[j], -j))
            sizes[donor] -= 1
            sizes[i] += 1
    return sizes


def validate_ratios(ratios) -> tuple[float, float, float]:
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValidationError("split needs exactly three ratios")
    if any(not r > 0 for r in ratios):
        raise ValidationError(f"split ratios must be positive, got {ratios}")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValidationError(f"split ratios must sum to 1, got {sum(ratios)}")
    return ratios


def split(d: Dataset, ratios=DEFAULT_RATIOS, seed: int = 0) -> SplitDataset:
    """Stratified train/validation/test split.

    Each class is shuffled with a seeded PCG64 generator, apportioned to the
    parts by largest remainder, and dealt round-robin to the parts that
    still have room. Indices inside each part are returned in ascending
    order.
    """
    ratios = validate_ratios(ratios)
    rng = np.random.default_rng(seed)
    parts: list[list[int]] = [[], [], []]
    for cls in range(d.class_count):
        members = np.flatnonzero(d.labels == cls)
        if members.size < len(parts):
            raise ValidationError(
                f"class {d.class_names[cls]!r} has {members.size} patterns; "
                f"need at least {len(parts)}"
            )
        members = rng.permutation(members)
        room = _part_sizes(members.size, ratios)
        slot = 0
        for idx in members:
            while room[slot] == 0:
                slot = (slot + 1) % len(parts)
            parts[slot].append(int(idx))
            room[slot] -= 1
            slot = (slot + 1) % len(parts)
    idx = tuple(np.array(sorted(p), dtype=np.int64) for p in parts)
    return SplitDataset(d.take(idx[0]), d.take(idx[1]), d.take(idx[2]), seed, idx)


def prepare(d: Dataset) -> Dataset:
    """Impute then scale, the preprocessing applied before splitting."""
    return softmax_scale(impute_missing(d))
