"""Labeled feature matrices: CSV ingestion, validation, per-class splits.

The on-disk format is a UTF-8 CSV with a header line
``label,f0,f1,...,f{M-1}``; each data line is one sample whose first cell
is an arbitrary comma-free label string. Lines starting with ``#`` are
comments (feature extractors record their provenance there) and are
skipped. Labels are remapped to contiguous class indices 0..C-1 in
first-appearance order; the original strings are kept in ``label_names``.

Split randomness comes from numpy's PCG64 generator seeded from
``(seed, class_index)``, so a split depends only on the seed, the class,
and the within-class row order — never on how classes interleave in the
file.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import FormatError, InsufficientClassSize, InvalidInput, NegativeEntry

__all__ = [
    "LabeledDataset",
    "SplitSpec",
    "Split",
    "load_feature_csv",
    "write_feature_csv",
    "split_per_class",
    "validate_nonnegative",
]

# Entries in [-CLAMP_TOL, 0) are treated as round-off and clamped to zero
# when clamping is requested.
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class LabeledDataset:
    """N samples of dimension M with class labels in 0..C-1."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    label_names: tuple = ()
    clamped_entries: int = 0

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise InvalidInput("features must be a non-empty 2-D matrix")
        if labels.shape != (feats.shape[0],):
            raise InvalidInput("labels must have one entry per sample row")
        if self.class_count < 1:
            raise InvalidInput("class_count must be at least 1")
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise InvalidInput("labels must lie in 0..class_count-1")
        counts = np.bincount(labels, minlength=self.class_count)
        if np.any(counts == 0):
            raise InvalidInput("every class must have at least one member")

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def class_index(self):
        """Row indices per class, partitioning 0..N-1."""
        return [np.flatnonzero(self.labels == j) for j in range(self.class_count)]

    def class_sizes(self):
        return np.bincount(self.labels, minlength=self.class_count)


@dataclass(frozen=True)
class SplitSpec:
    """Per-class train/test sizes and the split seed."""

    train_per_class: int
    test_per_class: int
    seed: int

    def __post_init__(self):
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise InvalidInput("train_per_class and test_per_class must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInput("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class Split:
    train: LabeledDataset
    test: LabeledDataset
    train_indices: np.ndarray = field(default=None, repr=False)
    test_indices: np.ndarray = field(default=None, repr=False)


def load_feature_csv(path):
    """Load a labeled dataset from the feature CSV format.

    Raises OSError for missing files and FormatError (with the 1-based
    line number) for ragged rows, non-numeric or non-finite cells, and
    empty files.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = []
        for lineno, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and cells[0].strip() == ""):
                continue  # skip blank lines
            if cells[0].startswith("#"):
                continue  # comment lines carry extractor provenance
            rows.append((lineno, cells))
    if not rows:
        raise FormatError(1, "file is empty")
    header_line, header = rows[0]
    if len(header) < 2 or header[0].strip().lower() != "label":
        raise FormatError(header_line, "header must be 'label,f0,f1,...'")
    n_features = len(header) - 1
    if not rows[1:]:
        raise FormatError(header_line, "file has a header but no data rows")

    label_names = []
    label_to_class = {}
    labels = []
    features = []
    for lineno, cells in rows[1:]:
        if len(cells) != n_features + 1:
            raise FormatError(
                lineno,
                f"expected {n_features} feature cells, found {len(cells) - 1}",
            )
        name = cells[0]
        if name == "":
            raise FormatError(lineno, "empty label")
        if name not in label_to_class:
            label_to_class[name] = len(label_names)
            label_names.append(name)
        labels.append(label_to_class[name])
        try:
            values = [float(c) for c in cells[1:]]
        except ValueError:
            raise FormatError(lineno, "non-numeric feature cell") from None
        if not all(np.isfinite(values)):
            raise FormatError(lineno, "non-finite feature value")
        features.append(values)

    return LabeledDataset(
        features=np.asarray(features, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        class_count=len(label_names),
        label_names=tuple(label_names),
    )


def write_feature_csv(d, path):
    """Write a dataset back out in the feature CSV format.

    Values use 17 significant digits so a load round-trips exactly.
    """
    names = d.label_names or tuple(str(j) for j in range(d.class_count))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("label," + ",".join(f"f{i}" for i in range(d.n_features)) + "\n")
        for row, label in zip(d.features, d.labels):
            cells = ",".join(f"{v:.17g}" for v in row)
            fh.write(f"{names[label]},{cells}\n")


def split_per_class(d, spec):
    """Draw a per-class train/test split.

    Within each class the rows are shuffled by a PCG64 generator seeded
    from (spec.seed, class index); the first ``train_per_class`` go to
    train and the next ``test_per_class`` to test. Outputs concatenate
    classes in class order.
    """
    need = spec.train_per_class + spec.test_per_class
    train_parts = []
    test_parts = []
    for j, members in enumerate(d.class_index):
        if len(members) < need:
            raise InsufficientClassSize(j, len(members), need)
        rng = np.random.default_rng(np.random.SeedSequence((int(spec.seed), j)))
        order = rng.permutation(len(members))
        shuffled = members[order]
        train_parts.append(shuffled[: spec.train_per_class])
        test_parts.append(shuffled[spec.train_per_class : need])

    train_idx = np.concatenate(train_parts)
    test_idx = np.concatenate(test_parts)

    def take(idx):
        return LabeledDataset(
            features=d.features[idx],
            labels=d.labels[idx],
            class_count=d.class_count,
            label_names=d.label_names,
        )

    return Split(
        train=take(train_idx),
        test=take(test_idx),
        train_indices=train_idx,
        test_indices=test_idx,
    )


def validate_nonnegative(d, clamp=False):
    """Check (or enforce) that all features are non-negative.

    With ``clamp=False`` the dataset is returned unchanged when every
    entry is >= 0. With ``clamp=True`` entries in [-1e-9, 0) are set to
    zero and the count is recorded on the returned dataset; anything
    below -1e-9 is still an error.
    """
    feats = d.features
    floor = -CLAMP_TOL if clamp else 0.0
    bad = np.argwhere(feats < floor)
    if bad.size:
        r, c = bad[0]
        raise NegativeEntry(int(r), int(c), float(feats[r, c]))
    if not clamp:
        return d
    mask = feats < 0.0
    count = int(mask.sum())
    if count == 0:
        return d
    fixed = feats.copy()
    fixed[mask] = 0.0
    return replace(d, features=fixed, clamped_entries=count)
