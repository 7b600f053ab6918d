"""Scatter statistics and fitted linear subspaces.

Three families of projections are produced here:

* ``lda_multiclass`` — the C-1 generalized eigendirections of the
  between/within scatter pair, solved by Cholesky whitening of the
  regularized within scatter.
* ``fs_binary`` — an orthonormal set of binary discriminant directions
  built recursively: each new direction maximizes the two-class Fisher
  ratio subject to orthogonality against all previous ones. Directions
  come out ordered by their discrim-values.
* ``svd`` — the top right singular directions of the (optionally
  centered) training matrix.

All fits are pure functions of their inputs; the returned ``Projection``
is immutable and can be applied to any sample matrix with matching width.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateMeans,
    InvalidInput,
    NeedTwoClasses,
    NotBinary,
    NotPositiveDefinite,
    NumericalFailure,
    RecursionBreakdown,
)
from .linalg import SpdFactor, as_matrix, svd_decompose, sym_eig

__all__ = [
    "ScatterStats",
    "Projection",
    "LdaConfig",
    "compute_scatter",
    "fit_lda_multiclass",
    "fit_fs_binary",
    "discrim_values",
    "fit_svd_subspace",
    "project",
    "projection_to_json",
    "projection_from_json",
]

METHOD_LDA = "lda_multiclass"
METHOD_FS = "fs_binary"
METHOD_SVD = "svd"

# Class means closer than this (2-norm of their difference) leave no
# usable binary discriminant direction.
_MEAN_TOL = 1e-12


@dataclass(frozen=True)
class ScatterStats:
    """Class/global means and scatter matrices of a labeled dataset.

    ``s_b``, ``s_w_binary`` and ``class_balance_weight`` are populated
    only for two-class problems, where the within scatter is the
    class-size weighted combination of the per-class scatters.
    """

    global_mean: np.ndarray
    class_means: np.ndarray  # C x M
    class_sizes: np.ndarray
    s_w_total: np.ndarray  # sum of per-class scatters
    s_b_total: np.ndarray  # spread of class means around the global mean
    s_b: np.ndarray | None = None  # mean difference, binary only
    s_w_binary: np.ndarray | None = None
    class_balance_weight: float | None = None

    @property
    def class_count(self):
        return self.class_means.shape[0]

    @property
    def dims(self):
        return self.class_means.shape[1]

    @property
    def s_b_outer(self):
        """Rank-one between scatter of the binary problem."""
        if self.s_b is None:
            raise NotBinary("binary scatter fields are only set for C = 2")
        return np.outer(self.s_b, self.s_b)


@dataclass(frozen=True)
class Projection:
    """An M x L linear map with per-direction metadata.

    ``discrim_values`` holds the Fisher ratios of discriminant methods,
    ``singular_values`` the singular values of an SVD fit, and ``center``
    the training column means when the fit centered its input.
    """

    directions: np.ndarray
    method: str
    source_dims: int
    discrim_values: np.ndarray | None = None
    singular_values: np.ndarray | None = None
    center: np.ndarray | None = None

    @property
    def output_dims(self):
        return self.directions.shape[1]


@dataclass(frozen=True)
class LdaConfig:
    """Regularization and binary-dimension defaults for discriminant fits."""

    delta: float = 5e-3
    max_dims_binary: int = 10

    def __post_init__(self):
        if self.delta <= 0:
            raise InvalidInput("delta must be positive")
        if self.max_dims_binary < 1:
            raise InvalidInput("max_dims_binary must be >= 1")


def compute_scatter(d):
    """Within/between scatter statistics of a labeled dataset.

    The per-class scatter is the sum of outer products of deviations from
    the class mean; the between scatter sums outer products of class-mean
    deviations from the global mean. For C = 2 the binary fields use the
    weighted within scatter with weight (N2-1)/(N1+N2-2).
    """
    if d.class_count < 2:
        raise NeedTwoClasses(f"need at least 2 classes, got {d.class_count}")
    feats = d.features
    m = d.n_features
    global_mean = feats.mean(axis=0)
    class_means = np.empty((d.class_count, m))
    per_class_scatter = []
    sizes = d.class_sizes()
    for j, members in enumerate(d.class_index):
        block = feats[members]
        mean_j = block.mean(axis=0)
        class_means[j] = mean_j
        dev = block - mean_j
        per_class_scatter.append(dev.T @ dev)

    s_w_total = np.zeros((m, m))
    for sw in per_class_scatter:
        s_w_total += sw
    mean_dev = class_means - global_mean
    s_b_total = mean_dev.T @ mean_dev

    s_b = s_w_binary = None
    beta = None
    if d.class_count == 2:
        n1, n2 = int(sizes[0]), int(sizes[1])
        beta = (n2 - 1) / (n1 + n2 - 2) if n1 + n2 > 2 else 0.5
        s_b = class_means[0] - class_means[1]
        s_w_binary = beta * per_class_scatter[0] + (1.0 - beta) * per_class_scatter[1]

    return ScatterStats(
        global_mean=global_mean,
        class_means=class_means,
        class_sizes=sizes,
        s_w_total=s_w_total,
        s_b_total=s_b_total,
        s_b=s_b,
        s_w_binary=s_w_binary,
        class_balance_weight=beta,
    )


def _fix_sign(column):
    i = np.argmax(np.abs(column))
    return -column if column[i] < 0 else column


def fit_lda_multiclass(stats, cfg=None):
    """Multiclass discriminant directions via Cholesky whitening.

    Forms the regularized within scatter S_W + delta*I = L L^T, solves the
    symmetric eigenproblem on L^-1 S_B L^-T, and back-transforms the top
    C-1 eigenvectors by L^-T. The generalized eigenvalues are stored as
    the projection's discrim-values, sorted non-increasing.
    """
    cfg = cfg or LdaConfig()
    m = stats.dims
    regularized = stats.s_w_total + cfg.delta * np.eye(m)
    try:
        factor = SpdFactor(regularized)
    except NotPositiveDefinite as exc:
        raise NumericalFailure(
            f"within scatter not positive definite even after adding {cfg.delta}*I"
        ) from exc
    lower = factor.lower
    # L^-1 S_B L^-T via two triangular solves.
    half = scipy.linalg.solve_triangular(
        lower, stats.s_b_total, lower=True, check_finite=False
    )
    whitened = scipy.linalg.solve_triangular(
        lower, half.T, lower=True, check_finite=False
    ).T
    eig = sym_eig(whitened)
    n_dirs = stats.class_count - 1
    back = scipy.linalg.solve_triangular(
        lower.T, eig.eigenvectors[:, :n_dirs], lower=False, check_finite=False
    )
    norms = np.linalg.norm(back, axis=0)
    if np.any(norms == 0):
        raise NumericalFailure("zero-norm eigenvector after back-transform")
    directions = back / norms
    directions = np.column_stack(
        [_fix_sign(directions[:, i]) for i in range(n_dirs)]
    )
    return Projection(
        directions=directions,
        method=METHOD_LDA,
        source_dims=m,
        discrim_values=eig.eigenvalues[:n_dirs].copy(),
    )


def _binary_within_factor(stats, delta):
    """Cholesky factor of the binary within scatter, regularizing on failure."""
    try:
        return SpdFactor(stats.s_w_binary)
    except NotPositiveDefinite:
        regularized = stats.s_w_binary + delta * np.eye(stats.dims)
        try:
            return SpdFactor(regularized)
        except NotPositiveDefinite as exc:
            raise NumericalFailure(
                f"binary within scatter not positive definite after adding {delta}*I"
            ) from exc


def fit_fs_binary(stats, n_dims, delta=5e-3):
    """Orthonormal binary discriminant directions, most discriminant first.

    d_1 is the normalized solution of S_W d = s_b. Each later d_n solves
    S_W d = s_b - D c where D stacks the previous directions and c solves
    the (n-1) x (n-1) Gram system with entries d_i^T S_W^-1 d_j against the
    right-hand side (1/alpha_1, 0, ..., 0); that is the stationarity
    condition of the Fisher ratio under orthogonality to d_1..d_{n-1}.
    ``delta`` regularizes the within scatter only if its Cholesky fails.
    """
    if stats.class_count != 2:
        raise NotBinary(f"fs_binary needs exactly 2 classes, got {stats.class_count}")
    m = stats.dims
    if not 1 <= n_dims <= m:
        raise InvalidInput(f"n_dims must be in 1..{m}, got {n_dims}")
    s_b = stats.s_b
    if np.linalg.norm(s_b) <= _MEAN_TOL:
        raise DegenerateMeans("class means coincide")

    factor = _binary_within_factor(stats, delta)
    w1 = factor.solve(s_b)  # S_W^-1 s_b
    norm1 = np.linalg.norm(w1)
    if norm1 == 0:
        raise NumericalFailure("S_W^-1 s_b vanished")
    alpha1 = 1.0 / norm1
    directions = np.empty((m, n_dims))
    directions[:, 0] = w1 * alpha1
    solved = [factor.solve(directions[:, 0])]  # columns of S_W^-1 D
    exhausted = False  # s_b fell inside the span of the found directions

    for n in range(2, n_dims + 1):
        d_prev = directions[:, : n - 1]
        candidate = None
        if not exhausted:
            w_prev = np.column_stack(solved)
            gram = d_prev.T @ w_prev  # entries d_i^T S_W^-1 d_j
            rhs = np.zeros(n - 1)
            rhs[0] = 1.0 / alpha1
            try:
                coeff = np.linalg.solve(gram, rhs)
            except np.linalg.LinAlgError:
                raise RecursionBreakdown(n, n - 1) from None
            if not np.all(np.isfinite(coeff)):
                raise RecursionBreakdown(n, n - 1)
            candidate = factor.solve(s_b - d_prev @ coeff)
            # One re-orthogonalization pass absorbs accumulated round-off.
            candidate = candidate - d_prev @ (d_prev.T @ candidate)
            if np.linalg.norm(candidate) <= 1e-10 * norm1:
                # Every direction orthogonal to the prefix scores a zero
                # Fisher ratio; fall through to a deterministic completion.
                exhausted = True
                candidate = None
        if candidate is None:
            candidate = _orthogonal_completion(d_prev)
        directions[:, n - 1] = candidate / np.linalg.norm(candidate)
        solved.append(factor.solve(directions[:, n - 1]))

    gammas = _discrim_values_binary(directions, stats)
    return Projection(
        directions=directions,
        method=METHOD_FS,
        source_dims=m,
        discrim_values=gammas,
    )


def _orthogonal_completion(prefix):
    """A unit vector orthogonal to the columns of ``prefix``.

    Scans the standard basis in index order, so the choice is
    deterministic; used once the discriminant recursion has exhausted
    every direction with a positive Fisher ratio.
    """
    m = prefix.shape[0]
    for i in range(m):
        candidate = np.zeros(m)
        candidate[i] = 1.0
        candidate -= prefix @ (prefix.T @ candidate)
        norm = np.linalg.norm(candidate)
        if norm > 1e-8:
            return candidate / norm
    raise RecursionBreakdown(prefix.shape[1] + 1, prefix.shape[1])


def _discrim_values_binary(directions, stats):
    num = (directions.T @ stats.s_b) ** 2
    den = np.einsum("im,ij,jm->m", directions, stats.s_w_binary, directions)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    out[num == 0] = 0.0
    return out


def discrim_values(p, stats):
    """Fisher ratio achieved by each direction of a discriminant projection."""
    if p.method not in (METHOD_FS, METHOD_LDA):
        raise InvalidInput(f"projection method {p.method!r} has no discrim-values")
    if p.source_dims != stats.dims:
        raise InvalidInput(
            f"projection is {p.source_dims}-dimensional, stats are {stats.dims}"
        )
    if p.method == METHOD_FS:
        if stats.s_w_binary is None:
            raise InvalidInput("fs_binary discrim-values need binary scatter stats")
        return _discrim_values_binary(p.directions, stats)
    num = np.einsum("im,ij,jm->m", p.directions, stats.s_b_total, p.directions)
    den = np.einsum("im,ij,jm->m", p.directions, stats.s_w_total, p.directions)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    out[num == 0] = 0.0
    return out


def fit_svd_subspace(train, p, center=False):
    """Top-p right singular directions of the training matrix.

    With ``center=True`` the column means are removed first and stored on
    the projection so later samples are shifted identically.
    """
    feats = train.features
    n, m = feats.shape
    if not 1 <= p <= min(n, m):
        raise InvalidInput(f"p must be in 1..{min(n, m)}, got {p}")
    mean = feats.mean(axis=0) if center else None
    matrix = feats - mean if center else feats
    result = svd_decompose(matrix)
    directions = np.column_stack(
        [_fix_sign(result.v[:, i]) for i in range(p)]
    )
    return Projection(
        directions=directions,
        method=METHOD_SVD,
        source_dims=m,
        singular_values=result.singular_values[:p].copy(),
        center=mean,
    )


def project(p, samples):
    """Apply a fitted projection to a sample matrix (rows are samples)."""
    mat = as_matrix(samples, "samples")
    if mat.shape[1] != p.source_dims:
        raise InvalidInput(
            f"samples have {mat.shape[1]} features, projection expects {p.source_dims}"
        )
    if p.center is not None:
        mat = mat - p.center
    return mat @ p.directions


def _array_field(value):
    return None if value is None else [float(x) for x in np.ravel(value)]


def projection_to_json(p):
    """Serialize a projection to a JSON string (loss-free for doubles)."""
    doc = {
        "method": p.method,
        "source_dims": int(p.source_dims),
        "output_dims": int(p.output_dims),
        "directions": _array_field(p.directions),  # row-major M x L
        "discrim_values": _array_field(p.discrim_values),
        "singular_values": _array_field(p.singular_values),
        "center": _array_field(p.center),
    }
    return json.dumps(doc, indent=2)


def projection_from_json(text):
    doc = json.loads(text)
    m, out = doc["source_dims"], doc["output_dims"]
    directions = np.asarray(doc["directions"], dtype=np.float64).reshape(m, out)

    def arr(key, size):
        value = doc.get(key)
        if value is None:
            return None
        got = np.asarray(value, dtype=np.float64)
        if got.size != size:
            raise InvalidInput(f"{key} has {got.size} entries, expected {size}")
        return got

    return Projection(
        directions=directions,
        method=doc["method"],
        source_dims=m,
        discrim_values=arr("discrim_values", out),
        singular_values=arr("singular_values", out),
        center=arr("center", m),
    )
