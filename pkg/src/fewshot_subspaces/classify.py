"""KNN prediction, accuracy, and the two-sample z significance test.

KNN uses Euclidean distance. Neighbor selection orders candidates by
(distance, label) so predictions are deterministic and invariant to any
permutation of the training rows. Vote ties are broken first by the
smaller summed distance among the tied classes, then by the smaller
class index.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput

__all__ = [
    "KnnConfig",
    "knn_predict",
    "accuracy",
    "mean_accuracy_over_k",
    "z_test",
]

DEFAULT_K_VALUES = (1, 5, 10, 15)


@dataclass(frozen=True)
class KnnConfig:
    """Neighborhood sizes to average over; metric is Euclidean."""

    k_values: tuple = field(default=DEFAULT_K_VALUES)
    metric: str = "euclidean"

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        if not self.k_values:
            raise InvalidInput("k_values must be non-empty")
        if any(k < 1 for k in self.k_values):
            raise InvalidInput("every k must be >= 1")
        if any(a >= b for a, b in zip(self.k_values, self.k_values[1:])):
            raise InvalidInput("k_values must be strictly increasing")
        if self.metric != "euclidean":
            raise InvalidInput(f"unsupported metric {self.metric!r}")


def _distance_matrix(train, test):
    train = np.asarray(train, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if train.ndim != 2 or test.ndim != 2:
        raise InvalidInput("feature matrices must be 2-D")
    if train.shape[1] != test.shape[1]:
        raise InvalidInput(
            f"train has {train.shape[1]} features, test has {test.shape[1]}"
        )
    sq = (
        np.sum(test**2, axis=1)[:, None]
        + np.sum(train**2, axis=1)[None, :]
        - 2.0 * (test @ train.T)
    )
    return np.sqrt(np.clip(sq, 0.0, None))


def _vote(dist_row, train_labels, k, n_classes):
    order = np.lexsort((train_labels, dist_row))[:k]
    votes = np.bincount(train_labels[order], minlength=n_classes)
    top = votes.max()
    tied = np.flatnonzero(votes == top)
    if len(tied) == 1:
        return int(tied[0])
    sums = np.array(
        [dist_row[order][train_labels[order] == c].sum() for c in tied]
    )
    best = sums.min()
    # np.flatnonzero scans in class-index order, so equal sums fall back
    # to the smaller class automatically.
    return int(tied[np.flatnonzero(sums == best)[0]])


def knn_predict(train_feats, train_labels, test_feats, k):
    """Label each test row by majority vote among its k nearest rows."""
    train_labels = np.asarray(train_labels, dtype=np.int64)
    dist = _distance_matrix(train_feats, test_feats)
    n_train = dist.shape[1]
    if k > n_train:
        raise InvalidInput(f"k={k} exceeds {n_train} training samples")
    if len(train_labels) != n_train:
        raise InvalidInput("train labels must match train rows")
    n_classes = int(train_labels.max()) + 1
    return np.array(
        [_vote(dist[i], train_labels, k, n_classes) for i in range(dist.shape[0])],
        dtype=np.int64,
    )


def accuracy(pred, truth):
    """Fraction of exact label matches."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise InvalidInput("prediction and truth lengths differ")
    return float(np.mean(pred == truth))


def mean_accuracy_over_k(train_feats, train_labels, test_feats, test_labels, cfg):
    """Arithmetic mean of KNN accuracy over the configured k values."""
    train_labels = np.asarray(train_labels, dtype=np.int64)
    test_labels = np.asarray(test_labels, dtype=np.int64)
    dist = _distance_matrix(train_feats, test_feats)
    n_train = dist.shape[1]
    if max(cfg.k_values) > n_train:
        raise InvalidInput(
            f"k={max(cfg.k_values)} exceeds {n_train} training samples"
        )
    n_classes = int(train_labels.max()) + 1
    accs = []
    for k in cfg.k_values:
        pred = np.array(
            [_vote(dist[i], train_labels, k, n_classes) for i in range(dist.shape[0])]
        )
        accs.append(accuracy(pred, test_labels))
    return float(np.mean(accs))


def z_test(sample_a, sample_b):
    """Two-sample unpooled z-test on the means.

    Returns (z, p) with z = (mean_a - mean_b) / sqrt(var_a/n_a + var_b/n_b)
    using unbiased variances and p the two-sided standard normal tail.
    Zero pooled variance degenerates to z = 0 (equal means, p = 1) or a
    signed infinity (p = 0).
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InvalidInput("z_test needs at least 2 values per sample")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInput("z_test samples must be finite")
    diff = a.mean() - b.mean()
    pooled = a.var(ddof=1) / a.size + b.var(ddof=1) / b.size
    if pooled == 0.0:
        if diff == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, diff), 0.0
    z = diff / math.sqrt(pooled)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return float(z), float(p)
