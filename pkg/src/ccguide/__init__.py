"""Canonical-correlation guided two-view networks in numpy."""

from .cca import CcaResult, dcca_gradient, dcca_objective, fit_cca, identity_residuals, total_correlation
from .data import (
    TwoViewDataset,
    gen_classification,
    gen_correlated_gaussian,
    gen_noisy_patterns,
    gen_rul_series,
    load_csv,
    metric_accuracy,
    metric_mae,
    metric_mse,
)
from .errors import (
    CcguideError,
    CheckpointError,
    InsufficientDataError,
    InvalidInputError,
    NumericalFailureError,
    ParseError,
    TrainingDivergedError,
)
from .filter import FilterParams, apply_filter, filter_backward
from .linalg import covariance, svd, sym_inv_sqrt
from .model import (
    CcdnnModel,
    RefreshPolicy,
    build_ccdnn,
    evaluate,
    forward_task,
    predict,
    refresh_constraint,
    train,
    train_dcca_baseline,
    train_dcca_reconstruction,
)
from .nn import Network, TrainConfig

__version__ = "0.1.0"
