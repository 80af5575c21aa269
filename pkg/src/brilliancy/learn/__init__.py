"""Training stack: feature selectors, network architectures with
hand-derived backprop, AdamW training with early stopping, k-fold cross
validation, grid search, and the k-NN / Gaussian naive Bayes baselines."""

from .selectors import FeatureSelector, parse_selector, select_matrix, selector_dim
from .models import ARCH_KINDS, ArchitectureSpec, default_spec, make_model, param_count
from .training import Checkpoint, NormStats, TrainConfig, TrainingDivergedError, train
from .validate import CVResult, balanced_accuracy, cross_validate, grid_search
from .baselines import GaussianNB, knn_scores

__all__ = [
    "ARCH_KINDS", "ArchitectureSpec", "CVResult", "Checkpoint", "FeatureSelector",
    "GaussianNB", "NormStats", "TrainConfig", "TrainingDivergedError",
    "balanced_accuracy", "cross_validate", "default_spec", "grid_search",
    "knn_scores", "make_model", "param_count", "parse_selector",
    "select_matrix", "selector_dim", "train",
]
