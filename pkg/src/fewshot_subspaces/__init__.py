"""Subspace feature representations for few-shot classification.

Discriminant, SVD, and non-negative factorization subspaces over labeled
feature matrices, a deterministic KNN evaluator, and a repeated-split
experiment harness with a CLI frontend.
"""

from .classify import KnnConfig, accuracy, knn_predict, mean_accuracy_over_k, z_test
from .config import ExperimentConfig, FactorizationConfig, SplitConfig, config_from_json
from .dataset import (
    LabeledDataset,
    Split,
    SplitSpec,
    load_feature_csv,
    split_per_class,
    validate_nonnegative,
    write_feature_csv,
)
from .factorization import (
    AdadeltaState,
    NmfModel,
    SnmfModel,
    adadelta_step,
    nmf_fit,
    nmf_transform,
    reconstruction_error,
    snmf_fit,
    snmf_predict_proba,
)
from .harness import (
    ExperimentReport,
    dimension_sweep,
    emit_report,
    format_mean_std,
    nmf_init_study,
    run_experiment,
)
from .linalg import solve_spd, svd_decompose, sym_eig
from .subspaces import (
    LdaConfig,
    Projection,
    ScatterStats,
    compute_scatter,
    discrim_values,
    fit_fs_binary,
    fit_lda_multiclass,
    fit_svd_subspace,
    project,
)

__version__ = "0.1.0"
