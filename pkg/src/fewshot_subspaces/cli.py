"""Command-line frontend.

Subcommands cover the whole pipeline without writing code:

    split       draw one per-class split and write train/test CSVs
    fit         fit one method on the full input and serialize the model
    transform   project a CSV through a serialized projection/model
    evaluate    run the repeated-split experiment and write reports
    sweep       evaluate one method across several dimensions
    init-study  NMF random-initialization stability study

Every subcommand reads an experiment config (``--config``), optionally
patched by repeatable ``--set key=value`` overrides and ``--seed``.
Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 numerical failure; errors print one ``error[kind]: ...`` line.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .config import apply_overrides, config_from_doc
from .dataset import SplitSpec, load_feature_csv, split_per_class, write_feature_csv
from .errors import (
    ConfigError,
    DegenerateMeans,
    FormatError,
    InsufficientClassSize,
    InvalidInput,
    NeedTwoClasses,
    NegativeEntry,
    NotBinary,
    NotPositiveDefinite,
    NumericalFailure,
    RecursionBreakdown,
    SubspaceError,
)
from .factorization import (
    model_from_json,
    model_to_json,
    nmf_fit,
    nmf_transform,
    snmf_fit,
    trace_to_csv,
)
from .subspaces import (
    LdaConfig,
    compute_scatter,
    fit_fs_binary,
    fit_lda_multiclass,
    fit_svd_subspace,
    project,
    projection_from_json,
    projection_to_json,
)

USAGE_ERROR = 1
DATA_ERROR = 2
NUMERIC_ERROR = 3

_NUMERIC_ERRORS = (
    NotPositiveDefinite,
    NumericalFailure,
    RecursionBreakdown,
    DegenerateMeans,
)
_DATA_ERRORS = (
    ConfigError,
    FormatError,
    InsufficientClassSize,
    InvalidInput,
    NeedTwoClasses,
    NegativeEntry,
    NotBinary,
    OSError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    parser = _Parser(
        prog="fewshot-subspaces",
        description="Subspace feature representations and few-shot KNN evaluation.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def common(p, method=False, dims=False):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry (repeatable, dotted keys)",
        )
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        if method:
            p.add_argument("--method", required=True, help="subspace method name")
        if dims:
            p.add_argument(
                "--dims", required=True, help="comma-separated dimension list"
            )

    p = sub.add_parser("split", help="write one train/test split")
    common(p)

    p = sub.add_parser(
        "fit", help="fit a method on the whole input CSV"
    )
    common(p, method=True)
    p.add_argument("--dims", default=None, help="subspace dimension")

    p = sub.add_parser(
        "transform", help="project a CSV through a model"
    )
    common(p)
    p.add_argument("--model", required=True, help="serialized projection/model JSON")

    p = sub.add_parser(
        "evaluate", help="repeated-split evaluation"
    )
    common(p)

    p = sub.add_parser("sweep", help="dimension sweep")
    common(p, method=True, dims=True)

    p = sub.add_parser(
        "init-study", help="NMF initialization stability study"
    )
    common(p, dims=True)
    p.add_argument("--inits", type=int, default=20, help="number of random seeds")

    return parser


def _load_config(args):
    text = Path(args.config).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    doc = apply_overrides(doc, args.overrides)
    if args.seed is not None:
        doc["base_seed"] = args.seed
    return config_from_doc(doc)


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_split(args):
    cfg = _load_config(args)
    dataset = load_feature_csv(cfg.dataset_path)
    split = split_per_class(
        dataset,
        SplitSpec(
            train_per_class=cfg.split.train_per_class,
            test_per_class=cfg.split.test_per_class,
            seed=cfg.base_seed,
        ),
    )
    out = _out_dir(args)
    write_feature_csv(split.train, out / "train.csv")
    write_feature_csv(split.test, out / "test.csv")
    print(f"wrote {out / 'train.csv'} and {out / 'test.csv'}")
    return 0


def _parse_dims_list(text):
    try:
        dims = [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise UsageError(f"--dims must be a comma-separated integer list, got {text!r}")
    if not dims:
        raise UsageError("--dims must name at least one dimension")
    return dims


def _cmd_fit(args):
    cfg = _load_config(args)
    if args.method not in ("svd", "lda", "fs_binary", "nmf", "snmf"):
        raise UsageError(f"--method must be a subspace method, got {args.method!r}")
    dataset = load_feature_csv(cfg.dataset_path)
    dims = (
        _parse_dims_list(args.dims)[0]
        if args.dims is not None
        else cfg.method_dims(args.method, dataset.class_count)
    )
    out = _out_dir(args)
    fact = cfg.factorization
    if args.method == "svd":
        model_text = projection_to_json(
            fit_svd_subspace(dataset, dims, center=cfg.svd_center)
        )
    elif args.method == "lda":
        model_text = projection_to_json(
            fit_lda_multiclass(compute_scatter(dataset), LdaConfig())
        )
    elif args.method == "fs_binary":
        model_text = projection_to_json(
            fit_fs_binary(compute_scatter(dataset), dims)
        )
    elif args.method == "nmf":
        model = nmf_fit(
            dataset.features, dims, iters=fact.iters, seed=cfg.base_seed
        )
        (out / "trace.csv").write_text(trace_to_csv(model.error_trace))
        model_text = model_to_json(model)
    else:
        model = snmf_fit(
            dataset.features,
            dataset.labels,
            dims,
            lambda_reg=fact.lambda_reg,
            iters=fact.iters,
            seed=cfg.base_seed,
            rho=fact.rho,
            epsilon=fact.epsilon,
        )
        (out / "trace.csv").write_text(trace_to_csv(model.loss_trace))
        model_text = model_to_json(model)
    (out / "model.json").write_text(model_text, encoding="utf-8")
    print(f"wrote {out / 'model.json'}")
    return 0


def _cmd_transform(args):
    cfg = _load_config(args)
    dataset = load_feature_csv(cfg.dataset_path)
    text = Path(args.model).read_text(encoding="utf-8")
    doc = json.loads(text)
    if "kind" in doc:  # factorization model
        model = model_from_json(text)
        projected = nmf_transform(
            model.x,
            dataset.features,
            iters=cfg.factorization.iters,
            seed=cfg.base_seed,
        )
    else:
        projected = project(projection_from_json(text), dataset.features)
    out = _out_dir(args)
    reduced = replace(dataset, features=np.ascontiguousarray(projected))
    write_feature_csv(reduced, out / "projected.csv")
    print(f"wrote {out / 'projected.csv'}")
    return 0


def _cmd_evaluate(args):
    cfg = _load_config(args)
    report = harness.run_experiment(cfg)
    out = _out_dir(args)
    harness.emit_report(report, out)
    print(harness.report_to_text(report), end="")
    return 0


def _cmd_sweep(args):
    cfg = _load_config(args)
    dims = _parse_dims_list(args.dims)
    rows = harness.dimension_sweep(cfg, args.method, dims)
    out = _out_dir(args)
    (out / "sweep.csv").write_text(harness.sweep_to_csv(rows), encoding="utf-8")
    doc = [
        {
            "dim": r.dim,
            "mean": r.mean,
            "std": r.std,
            "split_hashes": list(r.report.split_hashes),
        }
        for r in rows
    ]
    (out / "sweep.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8"
    )
    print(f"wrote {out / 'sweep.csv'}")
    return 0


def _cmd_init_study(args):
    cfg = _load_config(args)
    dims = _parse_dims_list(args.dims)
    if args.inits < 1:
        raise UsageError("--inits must be >= 1")
    rows = harness.nmf_init_study(cfg, dims, args.inits)
    out = _out_dir(args)
    (out / "init_study.csv").write_text(
        harness.init_study_to_csv(rows), encoding="utf-8"
    )
    summary = harness.summarize_init_study(rows)
    (out / "init_study_summary.json").write_text(
        json.dumps({str(k): v for k, v in summary.items()}, indent=2, sort_keys=True),
        encoding="utf-8",
    )
    print(f"wrote {out / 'init_study.csv'}")
    return 0


_COMMANDS = {
    "split": _cmd_split,
    "fit": _cmd_fit,
    "transform": _cmd_transform,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "init-study": _cmd_init_study,
}


def dispatch(argv):
    """Run one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    except _NUMERIC_ERRORS as exc:
        print(f"error[numeric]: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except _DATA_ERRORS as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return DATA_ERROR
    except SubspaceError as exc:  # any remaining package error is a data problem
        print(f"error[data]: {exc}", file=sys.stderr)
        return DATA_ERROR


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
