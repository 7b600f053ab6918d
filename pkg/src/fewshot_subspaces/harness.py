"""End-to-end experiment driver.

``run_experiment`` repeats the protocol: draw a per-class split, fit each
requested subspace on the training half only, project both halves, score
with KNN averaged over the configured neighborhood sizes, then aggregate
mean and (unbiased) standard deviation across repetitions and attach
pairwise z-tests. Repetition r splits with seed ``base_seed + r`` and
initializes factorizations with seed ``base_seed * 1000 + r``, so both
are independently reproducible.

Reports are deterministic given the config; wall-clock fields are the
only exception and live under keys named ``wall_time_s`` so they can be
stripped for comparisons.
"""

import hashlib
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .classify import mean_accuracy_over_k, z_test
from .dataset import SplitSpec, load_feature_csv, split_per_class, validate_nonnegative
from .errors import ConfigError, InvalidInput, SubspaceError
from .factorization import nmf_fit, nmf_transform, snmf_fit
from .subspaces import (
    LdaConfig,
    compute_scatter,
    fit_fs_binary,
    fit_lda_multiclass,
    fit_svd_subspace,
    project,
)

__all__ = [
    "MethodResult",
    "ExperimentReport",
    "SweepRow",
    "InitStudyRow",
    "run_experiment",
    "dimension_sweep",
    "nmf_init_study",
    "summarize_init_study",
    "emit_report",
    "sweep_to_csv",
    "init_study_to_csv",
    "format_mean_std",
    "report_to_json",
    "strip_wall_times",
]


@dataclass(frozen=True)
class MethodResult:
    method: str
    dims: int | None
    accuracies: tuple
    mean: float
    std: float
    wall_time_s: float


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    dataset_summary: dict
    split_hashes: tuple
    methods: dict  # name -> MethodResult
    pairwise: dict  # "a_vs_b" -> {"z": ..., "p": ...}


@dataclass(frozen=True)
class SweepRow:
    dim: int
    mean: float
    std: float
    report: ExperimentReport


@dataclass(frozen=True)
class InitStudyRow:
    dim: int
    init_seed: int
    final_error: float
    mean_accuracy: float


def _split_hash(split):
    digest = hashlib.sha256()
    digest.update(np.asarray(split.train_indices, dtype=np.int64).tobytes())
    digest.update(b"|")
    digest.update(np.asarray(split.test_indices, dtype=np.int64).tobytes())
    return digest.hexdigest()


def _check_preconditions(cfg, dataset):
    c = dataset.class_count
    for method in cfg.methods:
        if method in ("fs_binary", "snmf") and c != 2:
            raise ConfigError(
                f"method {method!r} requires a binary dataset, got {c} classes"
            )
        dims = cfg.method_dims(method, c)
        if method == "fs_binary" and dims > dataset.n_features:
            raise ConfigError(
                f"fs_binary dims {dims} exceed feature dimension {dataset.n_features}"
            )
    need = cfg.split.train_per_class + cfg.split.test_per_class
    smallest = int(dataset.class_sizes().min())
    if smallest < need:
        raise ConfigError(
            f"smallest class has {smallest} members, split needs {need}"
        )
    if max(cfg.knn.k_values) > cfg.split.train_per_class * c:
        raise ConfigError("largest KNN k exceeds the training set size")


def _project_method(cfg, method, split, fact_seed):
    """Train/test feature pairs for one method on one split."""
    train, test = split.train, split.test
    dims = cfg.method_dims(method, train.class_count)
    if method == "feature_space":
        return train.features, test.features, None
    if method == "svd":
        proj = fit_svd_subspace(train, dims, center=cfg.svd_center)
        return project(proj, train.features), project(proj, test.features), dims
    if method == "lda":
        proj = fit_lda_multiclass(compute_scatter(train), LdaConfig())
        return project(proj, train.features), project(proj, test.features), dims
    if method == "fs_binary":
        proj = fit_fs_binary(compute_scatter(train), dims)
        return project(proj, train.features), project(proj, test.features), dims
    fact = cfg.factorization
    train_nn = validate_nonnegative(train, clamp=True)
    test_nn = validate_nonnegative(test, clamp=True)
    if method == "nmf":
        model = nmf_fit(train_nn.features, dims, iters=fact.iters, seed=fact_seed)
    elif method == "snmf":
        model = snmf_fit(
            train_nn.features,
            train_nn.labels,
            dims,
            lambda_reg=fact.lambda_reg,
            iters=fact.iters,
            seed=fact_seed,
            rho=fact.rho,
            epsilon=fact.epsilon,
        )
    else:  # pragma: no cover - config validation rejects unknown names
        raise InvalidInput(f"unknown method {method!r}")
    coeffs_test = nmf_transform(
        model.x, test_nn.features, iters=fact.iters, seed=fact_seed
    )
    return model.k, coeffs_test, dims


def run_experiment(cfg, dataset=None):
    """Run every configured method over repeated splits and aggregate."""
    if dataset is None:
        dataset = load_feature_csv(cfg.dataset_path)
    _check_preconditions(cfg, dataset)

    reps = cfg.split.repetitions
    accuracies = {m: [] for m in cfg.methods}
    dims_used = {m: None for m in cfg.methods}
    wall = {m: 0.0 for m in cfg.methods}
    hashes = []
    for r in range(reps):
        spec = SplitSpec(
            train_per_class=cfg.split.train_per_class,
            test_per_class=cfg.split.test_per_class,
            seed=cfg.base_seed + r,
        )
        split = split_per_class(dataset, spec)
        hashes.append(_split_hash(split))
        fact_seed = cfg.base_seed * 1000 + r
        for method in cfg.methods:
            started = time.perf_counter()
            try:
                feats_train, feats_test, dims = _project_method(
                    cfg, method, split, fact_seed
                )
                acc = mean_accuracy_over_k(
                    feats_train,
                    split.train.labels,
                    feats_test,
                    split.test.labels,
                    cfg.knn,
                )
            except SubspaceError as exc:
                exc.args = (f"{exc} (repetition {r}, method {method})",)
                raise
            wall[method] += time.perf_counter() - started
            accuracies[method].append(acc)
            dims_used[method] = dims

    methods = {}
    for method in cfg.methods:
        accs = accuracies[method]
        methods[method] = MethodResult(
            method=method,
            dims=dims_used[method],
            accuracies=tuple(accs),
            mean=float(np.mean(accs)),
            std=float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
            wall_time_s=wall[method],
        )

    pairwise = {}
    names = sorted(cfg.methods)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            if reps < 2:
                continue
            z, p = z_test(methods[a].accuracies, methods[b].accuracies)
            pairwise[f"{a}_vs_{b}"] = {"z": z, "p": p}

    return ExperimentReport(
        config=cfg.to_doc(),
        dataset_summary={
            "classes": dataset.class_count,
            "samples": dataset.n_samples,
            "features": dataset.n_features,
            "label_names": list(dataset.label_names),
        },
        split_hashes=tuple(hashes),
        methods=methods,
        pairwise=pairwise,
    )


_SWEEPABLE = ("svd", "fs_binary", "nmf", "snmf")


def dimension_sweep(cfg, method, dims, dataset=None):
    """One run per dimension with a shared base seed, rows ordered by dim.

    lda is rejected (its dimension is pinned to C-1) and so is
    feature_space (it has no dimension to sweep).
    """
    if method not in _SWEEPABLE:
        raise InvalidInput(f"method {method!r} does not support dimension sweeps")
    dims = [int(d) for d in dims]
    if not dims:
        raise InvalidInput("dims must be non-empty")
    for d in dims:
        if d < 1:
            raise InvalidInput(f"invalid sweep dimension {d}")
    if dataset is None:
        dataset = load_feature_csv(cfg.dataset_path)
    rows = []
    for d in sorted(dims):
        sub_cfg = replace(cfg, methods=(method,), dims={**cfg.dims, method: d})
        report = run_experiment(sub_cfg, dataset=dataset)
        result = report.methods[method]
        rows.append(SweepRow(dim=d, mean=result.mean, std=result.std, report=report))
    return rows


def nmf_init_study(cfg, dims, inits, dataset=None):
    """Fit NMF with many random initializations on one fixed split.

    Records the final reconstruction error and the mean KNN accuracy per
    (dimension, initialization seed) pair.
    """
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise InvalidInput("dims must be positive")
    if inits < 1:
        raise InvalidInput("inits must be >= 1")
    if dataset is None:
        dataset = load_feature_csv(cfg.dataset_path)
    spec = SplitSpec(
        train_per_class=cfg.split.train_per_class,
        test_per_class=cfg.split.test_per_class,
        seed=cfg.base_seed,
    )
    split = split_per_class(dataset, spec)
    train = validate_nonnegative(split.train, clamp=True)
    test = validate_nonnegative(split.test, clamp=True)
    fact = cfg.factorization
    rows = []
    for d in dims:
        for i in range(inits):
            seed = cfg.base_seed * 1000 + i
            model = nmf_fit(train.features, d, iters=fact.iters, seed=seed)
            coeffs_test = nmf_transform(
                model.x, test.features, iters=fact.iters, seed=seed
            )
            acc = mean_accuracy_over_k(
                model.k, train.labels, coeffs_test, test.labels, cfg.knn
            )
            rows.append(
                InitStudyRow(
                    dim=d,
                    init_seed=seed,
                    final_error=float(model.error_trace[-1]),
                    mean_accuracy=acc,
                )
            )
    return rows


def summarize_init_study(rows):
    """Per-dimension accuracy spread (max - min) and mean final error."""
    dims = sorted({row.dim for row in rows})
    out = {}
    for d in dims:
        accs = [r.mean_accuracy for r in rows if r.dim == d]
        errs = [r.final_error for r in rows if r.dim == d]
        out[d] = {
            "accuracy_spread": max(accs) - min(accs),
            "mean_final_error": float(np.mean(errs)),
        }
    return out


def format_mean_std(mean, std):
    """Render a table cell like the published accuracy tables."""
    return f"{mean:.2f}±{std:.2f}"


def report_to_json(report):
    doc = {
        "config": report.config,
        "dataset": report.dataset_summary,
        "split_hashes": list(report.split_hashes),
        "methods": {
            name: {
                "dims": result.dims,
                "accuracies": list(result.accuracies),
                "mean": result.mean,
                "std": result.std,
                "wall_time_s": result.wall_time_s,
            }
            for name, result in report.methods.items()
        },
        "pairwise": report.pairwise,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def strip_wall_times(doc):
    """Recursively drop ``wall_time_s`` keys; used for determinism checks."""
    if isinstance(doc, dict):
        return {
            k: strip_wall_times(v) for k, v in doc.items() if k != "wall_time_s"
        }
    if isinstance(doc, list):
        return [strip_wall_times(v) for v in doc]
    return doc


def report_to_text(report):
    """Fixed-width human-readable table, accuracies in percent."""
    ds = report.dataset_summary
    lines = [
        f"dataset: {report.config['dataset_path']} "
        f"({ds['classes']} classes, {ds['samples']} samples, {ds['features']} features)",
        f"split: {report.config['split']['train_per_class']} train / "
        f"{report.config['split']['test_per_class']} test per class, "
        f"{report.config['split']['repetitions']} repetitions",
        "",
    ]
    name_w = max(len("method"), *(len(m) for m in report.methods))
    lines.append(f"{'method':<{name_w}}  {'dims':>4}  accuracy")
    for name, result in report.methods.items():
        dims = "-" if result.dims is None else str(result.dims)
        cell = format_mean_std(result.mean * 100.0, result.std * 100.0)
        lines.append(f"{name:<{name_w}}  {dims:>4}  {cell}")
    if report.pairwise:
        lines.append("")
        lines.append("pairwise z-tests:")
        for pair, values in sorted(report.pairwise.items()):
            lines.append(
                f"  {pair.replace('_vs_', ' vs ')}: z={values['z']:.3f} p={values['p']:.3g}"
            )
    return "\n".join(lines) + "\n"


def emit_report(report, path):
    """Write report.json and report.txt under ``path`` (a directory)."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_to_json(report), encoding="utf-8")
    (out / "report.txt").write_text(report_to_text(report), encoding="utf-8")


def sweep_to_csv(rows):
    lines = ["dim,mean,std"]
    lines += [f"{r.dim},{r.mean:.17g},{r.std:.17g}" for r in rows]
    return "\n".join(lines) + "\n"


def init_study_to_csv(rows):
    lines = ["dim,init_seed,final_error,mean_accuracy"]
    lines += [
        f"{r.dim},{r.init_seed},{r.final_error:.17g},{r.mean_accuracy:.17g}"
        for r in rows
    ]
    return "\n".join(lines) + "\n"
