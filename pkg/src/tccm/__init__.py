"""Time-conditioned contraction matching for tabular anomaly detection.

Train a velocity field that pushes normal rows toward the origin; score a
row by how far the field's one-step prediction misses that contraction.
Residual magnitudes double as per-feature attributions.
"""

__version__ = "0.1.0"

from .checkpoint import load_checkpoint, save_checkpoint
from .data import (
    Dataset,
    Scaler,
    SplitPlan,
    fit_scaler,
    identity_scaler,
    inject_contamination,
    load_csv,
    split_for_contamination,
    split_semi_supervised,
    transform,
    write_csv,
)
from .embedding import TimeEmbeddingConfig, embed
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionError,
    DomainError,
    MetricError,
    NumericalError,
    TccmError,
)
from .metrics import CsmReport, auprc, auroc, csm, select_epochs
from .model import (
    ModelParams,
    ScoreReport,
    attribute,
    init_params,
    lipschitz_upper_bound,
    score,
    score_with_input_grad,
    spectral_norm,
    velocity,
)
from .robustness import AttackConfig, attack_curve, certified_margin, pgd_attack
from .synthetic import (
    chi_mean,
    explanation_metrics,
    make_figure1_dataset,
    make_interpretability_dataset,
    mismatch_study,
    noncentral_chi_mean_mc,
    sample_gmm,
)
from .trainer import TrainConfig, loss, train

__all__ = [
    "__version__",
    "AttackConfig",
    "ConfigError",
    "CsmReport",
    "DataFormatError",
    "Dataset",
    "DimensionError",
    "DomainError",
    "MetricError",
    "ModelParams",
    "NumericalError",
    "Scaler",
    "ScoreReport",
    "SplitPlan",
    "TccmError",
    "TimeEmbeddingConfig",
    "TrainConfig",
    "attack_curve",
    "attribute",
    "auprc",
    "auroc",
    "certified_margin",
    "chi_mean",
    "csm",
    "embed",
    "explanation_metrics",
    "fit_scaler",
    "identity_scaler",
    "init_params",
    "inject_contamination",
    "lipschitz_upper_bound",
    "load_checkpoint",
    "load_csv",
    "loss",
    "make_figure1_dataset",
    "make_interpretability_dataset",
    "mismatch_study",
    "noncentral_chi_mean_mc",
    "pgd_attack",
    "sample_gmm",
    "save_checkpoint",
    "score",
    "score_with_input_grad",
    "select_epochs",
    "spectral_norm",
    "split_for_contamination",
    "split_semi_supervised",
    "train",
    "transform",
    "velocity",
    "write_csv",
]
