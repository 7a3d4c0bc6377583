from .features import (
    FEATURE_NAMES,
    FeatureRow,
    build_features,
    feature_matrix,
    neighbour_stats,
    stratified_split,
)
from .trees import (
    Tree,
    TreeModel,
    log_loss,
    predict,
    raw_margin,
    train_decision_tree,
    train_gradient_boost,
)

__all__ = [
    "FEATURE_NAMES",
    "FeatureRow",
    "Tree",
    "TreeModel",
    "build_features",
    "feature_matrix",
    "log_loss",
    "neighbour_stats",
    "predict",
    "raw_margin",
    "stratified_split",
    "train_decision_tree",
    "train_gradient_boost",
]
