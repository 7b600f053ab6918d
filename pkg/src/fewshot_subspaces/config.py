"""Experiment configuration: a JSON document mirroring ExperimentConfig.

Unknown keys anywhere in the document are an error, so a typo cannot
silently change an experiment. ``apply_overrides`` implements the CLI's
repeatable ``--set dotted.key=value`` flag on the raw document before
validation.
"""

import json
from dataclasses import dataclass, field

from .classify import DEFAULT_K_VALUES, KnnConfig
from .errors import ConfigError

__all__ = [
    "SplitConfig",
    "FactorizationConfig",
    "ExperimentConfig",
    "config_from_doc",
    "config_from_json",
    "apply_overrides",
    "KNOWN_METHODS",
    "DEFAULT_DIMS",
]

KNOWN_METHODS = ("feature_space", "svd", "lda", "fs_binary", "nmf", "snmf")

# Per-method subspace dimension defaults; lda is always pinned to C-1.
DEFAULT_DIMS = {"svd": 30, "nmf": 30, "snmf": 30, "fs_binary": 10}


@dataclass(frozen=True)
class SplitConfig:
    train_per_class: int
    test_per_class: int
    repetitions: int = 10

    def __post_init__(self):
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise ConfigError("split sizes must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")


@dataclass(frozen=True)
class FactorizationConfig:
    iters: int = 3000
    lambda_reg: float = 1.0
    rho: float = 0.95
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.iters < 1:
            raise ConfigError("factorization iters must be >= 1")
        if self.lambda_reg < 0:
            raise ConfigError("lambda_reg must be non-negative")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError("rho must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    split: SplitConfig
    methods: tuple
    dims: dict = field(default_factory=dict)
    knn: KnnConfig = field(default_factory=KnnConfig)
    factorization: FactorizationConfig = field(default_factory=FactorizationConfig)
    base_seed: int = 0
    svd_center: bool = False

    def __post_init__(self):
        methods = tuple(self.methods)
        object.__setattr__(self, "methods", methods)
        if not methods:
            raise ConfigError("methods must be non-empty")
        for name in methods:
            if name not in KNOWN_METHODS:
                raise ConfigError(
                    f"unknown method {name!r}; known: {', '.join(KNOWN_METHODS)}"
                )
        if len(set(methods)) != len(methods):
            raise ConfigError("methods must not repeat")
        dims = dict(DEFAULT_DIMS)
        dims.update(self.dims)
        for key, value in dims.items():
            if key not in KNOWN_METHODS or key == "feature_space":
                raise ConfigError(f"dims has no meaning for {key!r}")
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"dims.{key} must be a positive integer")
        object.__setattr__(self, "dims", dims)

    def method_dims(self, method, class_count):
        """Resolved subspace dimension for a method on a C-class problem."""
        if method == "feature_space":
            return None
        if method == "lda":
            pinned = class_count - 1
            explicit = self.dims.get("lda")
            if explicit is not None and explicit != pinned:
                raise ConfigError(
                    f"lda dims are pinned to C-1 = {pinned}, config says {explicit}"
                )
            return pinned
        return self.dims[method]

    def to_doc(self):
        """Fully resolved plain-dict echo of this configuration."""
        return {
            "dataset_path": self.dataset_path,
            "split": {
                "train_per_class": self.split.train_per_class,
                "test_per_class": self.split.test_per_class,
                "repetitions": self.split.repetitions,
            },
            "methods": list(self.methods),
            "dims": {k: self.dims[k] for k in sorted(self.dims)},
            "knn": {"k_values": list(self.knn.k_values)},
            "factorization": {
                "iters": self.factorization.iters,
                "lambda_reg": self.factorization.lambda_reg,
                "rho": self.factorization.rho,
                "epsilon": self.factorization.epsilon,
            },
            "base_seed": self.base_seed,
            "svd_center": self.svd_center,
        }


def _take(doc, known, where):
    unknown = set(doc) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _require(doc, key, where):
    if key not in doc:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return doc[key]


def config_from_doc(doc):
    """Build an ExperimentConfig from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _take(
        doc,
        (
            "dataset_path",
            "split",
            "methods",
            "dims",
            "knn",
            "factorization",
            "base_seed",
            "svd_center",
        ),
        "config",
    )
    split_doc = _require(doc, "split", "config")
    _take(split_doc, ("train_per_class", "test_per_class", "repetitions"), "split")
    split = SplitConfig(
        train_per_class=int(_require(split_doc, "train_per_class", "split")),
        test_per_class=int(_require(split_doc, "test_per_class", "split")),
        repetitions=int(split_doc.get("repetitions", 10)),
    )
    knn_doc = doc.get("knn", {})
    _take(knn_doc, ("k_values",), "knn")
    knn = KnnConfig(k_values=tuple(knn_doc.get("k_values", DEFAULT_K_VALUES)))
    fact_doc = doc.get("factorization", {})
    _take(fact_doc, ("iters", "lambda_reg", "rho", "epsilon"), "factorization")
    fact = FactorizationConfig(
        iters=int(fact_doc.get("iters", 3000)),
        lambda_reg=float(fact_doc.get("lambda_reg", 1.0)),
        rho=float(fact_doc.get("rho", 0.95)),
        epsilon=float(fact_doc.get("epsilon", 1e-6)),
    )
    dims_doc = doc.get("dims", {})
    if not isinstance(dims_doc, dict):
        raise ConfigError("dims must be an object")
    base_seed = doc.get("base_seed", 0)
    if not isinstance(base_seed, int) or isinstance(base_seed, bool):
        raise ConfigError("base_seed must be an integer")
    svd_center = doc.get("svd_center", False)
    if not isinstance(svd_center, bool):
        raise ConfigError("svd_center must be a boolean")
    return ExperimentConfig(
        dataset_path=str(_require(doc, "dataset_path", "config")),
        split=split,
        methods=tuple(_require(doc, "methods", "config")),
        dims={k: v for k, v in dims_doc.items()},
        knn=knn,
        factorization=fact,
        base_seed=base_seed,
        svd_center=svd_center,
    )


def config_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_doc(doc)


def _parse_override_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare strings need no quoting


def apply_overrides(doc, overrides):
    """Apply ``dotted.key=value`` overrides onto a raw config document.

    The dotted path must reference a key the schema knows; values are
    parsed as JSON with a bare-string fallback.
    """
    schema = {
        "dataset_path": None,
        "split": {"train_per_class", "test_per_class", "repetitions"},
        "methods": None,
        "dims": {"svd", "nmf", "snmf", "fs_binary", "lda"},
        "knn": {"k_values"},
        "factorization": {"iters", "lambda_reg", "rho", "epsilon"},
        "base_seed": None,
        "svd_center": None,
    }
    out = json.loads(json.dumps(doc))  # deep copy
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, raw = item.split("=", 1)
        parts = path.split(".")
        if parts[0] not in schema:
            raise ConfigError(f"override references unknown config key {parts[0]!r}")
        value = _parse_override_value(raw)
        if len(parts) == 1:
            out[parts[0]] = value
        elif len(parts) == 2 and isinstance(schema[parts[0]], set):
            if parts[1] not in schema[parts[0]]:
                raise ConfigError(
                    f"override references unknown config key {path!r}"
                )
            out.setdefault(parts[0], {})[parts[1]] = value
        else:
            raise ConfigError(f"override path {path!r} is not a known config key")
    return out
