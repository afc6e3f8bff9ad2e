"""The four base classifier families and their shared wrapper."""

from __future__ import annotations

from .base import FAMILIES, TrainedClassifier, TrainingConfig
from .knn import KnnModel, mahalanobis, regularized_inverse_covariance, select_k, train_knn
from .mlp import (
    MlpModel,
    RobustLmConfig,
    bisquare_weights,
    mlp_forward,
    mlp_jacobian,
    nw_init,
    prune_mlp,
    train_mlp,
)
from .svm import SvmModel, kkt_violations, rbf_kernel, rbf_matrix, train_svm
from .tree import TreeModel, best_split, gini_impurity, train_tree

_MODEL_TYPES = {"tree": TreeModel, "knn": KnnModel, "mlp": MlpModel, "svm": SvmModel}


def model_from_dict(family, d):
    if family not in _MODEL_TYPES:
        raise ValueError(f"unknown classifier family {family!r}")
    return _MODEL_TYPES[family].from_dict(d)


def train_family(family, train_view, seed, config=None, val_view=None):
    """Train one member of the given family; MLPs use val_view for pruning."""
    cfg = config or TrainingConfig()
    if family == "tree":
        model = train_tree(train_view, min_leaf=cfg.tree_min_leaf, max_depth=cfg.tree_max_depth)
    elif family == "knn":
        model = train_knn(train_view, seed, candidates=cfg.knn_candidates, folds=cfg.knn_folds)
    elif family == "mlp":
        hidden = cfg.mlp_hidden or train_view.X.shape[1] + 2
        lm = RobustLmConfig(max_iter=cfg.mlp_max_iter)
        model = train_mlp(train_view, hidden, seed, config=lm)
        if cfg.mlp_prune and val_view is not None:
            model = prune_mlp(
                model, train_view, val_view, config=lm, retrain_iters=cfg.mlp_prune_retrain_iters
            )
    elif family == "svm":
        model = train_svm(
            train_view,
            C=cfg.svm_c,
            gamma=cfg.svm_gamma or 1.0 / train_view.X.shape[1],
            tol=cfg.svm_tol,
            seed=seed,
        )
    else:
        raise ValueError(f"unknown classifier family {family!r}")
    return TrainedClassifier(family=family, model=model, seed=int(seed))


__all__ = [
    "FAMILIES",
    "TrainedClassifier",
    "TrainingConfig",
    "RobustLmConfig",
    "TreeModel",
    "KnnModel",
    "MlpModel",
    "SvmModel",
    "gini_impurity",
    "best_split",
    "train_tree",
    "mahalanobis",
    "regularized_inverse_covariance",
    "select_k",
    "train_knn",
    "nw_init",
    "mlp_forward",
    "mlp_jacobian",
    "bisquare_weights",
    "train_mlp",
    "prune_mlp",
    "rbf_kernel",
    "rbf_matrix",
    "kkt_violations",
    "train_svm",
    "model_from_dict",
    "train_family",
]
