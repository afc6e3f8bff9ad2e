"""Common wrapper for the four base classifier families."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrainingConfig:
    """Hyperparameters for all four families; defaults follow the toolkit conventions."""

    tree_min_leaf: int = 5
    tree_max_depth: int = 12
    knn_candidates: tuple = (1, 3, 5, 7, 9, 11)
    knn_folds: int = 3
    mlp_hidden: int | None = None  # None -> input width + 2
    mlp_max_iter: int = 150
    mlp_prune: bool = True
    mlp_prune_retrain_iters: int = 15
    svm_c: float = 10.0
    svm_gamma: float | None = None  # None -> 1 / input width
    svm_tol: float = 1e-3

    def to_dict(self):
        return {
            "tree_min_leaf": self.tree_min_leaf,
            "tree_max_depth": self.tree_max_depth,
            "knn_candidates": list(self.knn_candidates),
            "knn_folds": self.knn_folds,
            "mlp_hidden": self.mlp_hidden,
            "mlp_max_iter": self.mlp_max_iter,
            "mlp_prune": self.mlp_prune,
            "mlp_prune_retrain_iters": self.mlp_prune_retrain_iters,
            "svm_c": self.svm_c,
            "svm_gamma": self.svm_gamma,
            "svm_tol": self.svm_tol,
        }

    @classmethod
    def from_dict(cls, d):
        cfg = cls()
        for key, value in d.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key!r}")
            if key == "knn_candidates":
                value = tuple(value)
            setattr(cfg, key, value)
        return cfg


FAMILIES = ("tree", "knn", "mlp", "svm")


@dataclass
class TrainedClassifier:
    """A trained model of one family, scoring in [0,1] with a hard class at `threshold`."""

    family: str
    model: object
    seed: int
    threshold: float = 0.5

    def score(self, X):
        return self.model.score(np.atleast_2d(np.asarray(X, dtype=float)))

    def predict_class(self, X):
        return (self.score(X) >= self.threshold).astype(int)

    def to_dict(self):
        return {
            "family": self.family,
            "seed": int(self.seed),
            "threshold": float(self.threshold),
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        from . import model_from_dict

        return cls(
            family=d["family"],
            model=model_from_dict(d["family"], d["model"]),
            seed=int(d["seed"]),
            threshold=float(d["threshold"]),
        )
