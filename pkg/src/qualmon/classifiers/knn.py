"""k-nearest-neighbour classifier under the Mahalanobis metric, with the
neighbour count picked by internal cross-validation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import stratified_kfold


def regularized_inverse_covariance(X, eps_scale=1e-6):
    """Inverse of the sample covariance after adding eps*I, eps = eps_scale*trace/D.

    Degenerate inputs (fewer than two rows, or all-constant columns) fall back
    to the identity metric, which reduces the distance to Euclidean.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = X.shape[1]
    if X.shape[0] < 2:
        return np.eye(d)
    cov = np.cov(X, rowvar=False)
    cov = np.atleast_2d(cov)
    trace = float(np.trace(cov))
    if not np.isfinite(trace) or trace <= 0:
        return np.eye(d)
    cov = cov + (eps_scale * trace / d) * np.eye(d)
    inv = np.linalg.inv(cov)
    inv = 0.5 * (inv + inv.T)
    try:
        np.linalg.cholesky(inv)
    except np.linalg.LinAlgError:
        raise ValueError("covariance not positive definite after regularization") from None
    return inv


def mahalanobis(x, y, inv_cov):
    """sqrt((x-y)^T inv_cov (x-y))."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(np.sqrt(diff @ inv_cov @ diff))


@dataclass
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int
    inv_cov: np.ndarray

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=int)
        self.inv_cov = np.asarray(self.inv_cov, dtype=float)
        if self.k < 1 or self.k > len(self.y):
            raise ValueError(f"k={self.k} out of range for {len(self.y)} training rows")

    def neighbors(self, queries):
        """Indices of the k nearest training rows per query, ordered by
        (squared distance, training index)."""
        Q = np.atleast_2d(np.asarray(queries, dtype=float))
        out = np.empty((len(Q), self.k), dtype=int)
        for start in range(0, len(Q), 64):
            block = Q[start : start + 64]
            diff = self.X[None, :, :] - block[:, None, :]
            d2 = np.einsum("qnd,de,qne->qn", diff, self.inv_cov, diff)
            order = np.argsort(d2, axis=1, kind="stable")
            out[start : start + len(block)] = order[:, : self.k]
        return out

    def score(self, X):
        return self.y[self.neighbors(X)].mean(axis=1)

    def to_dict(self):
        return {
            "X": self.X.tolist(),
            "y": self.y.tolist(),
            "k": int(self.k),
            "inv_cov": self.inv_cov.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(X=np.asarray(d["X"]), y=np.asarray(d["y"]), k=int(d["k"]), inv_cov=np.asarray(d["inv_cov"]))


def select_k(view, candidates, folds, seed):
    """Candidate k with the lowest internal CV error; ties go to the smaller k."""
    candidates = sorted(set(int(k) for k in candidates))
    if not candidates:
        raise ValueError("empty candidate list")
    assignment = stratified_kfold(view.y, folds, seed)
    fold_train_sizes = [view.n - len(assignment.fold_indices(f)) for f in range(folds)]
    smallest = min(fold_train_sizes)
    if candidates[-1] > smallest:
        raise ValueError(f"candidate k={candidates[-1]} exceeds smallest CV training partition {smallest}")
    errors = {k: 0 for k in candidates}
    for fold in range(folds):
        held = assignment.fold_indices(fold)
        rest = np.flatnonzero(assignment.fold_of != fold)
        model = KnnModel(
            X=view.X[rest],
            y=view.y[rest],
            k=candidates[-1],
            inv_cov=regularized_inverse_covariance(view.X[rest]),
        )
        neigh_labels = model.y[model.neighbors(view.X[held])]
        for k in candidates:
            pred = (neigh_labels[:, :k].mean(axis=1) >= 0.5).astype(int)
            errors[k] += int(np.sum(pred != view.y[held]))
    return min(candidates, key=lambda k: (errors[k], k))


def train_knn(view, seed, k=None, candidates=(1, 3, 5, 7, 9, 11), folds=3):
    """Fit the metric on the (possibly bagged) view and pick k by CV unless given."""
    if view.n < 1:
        raise ValueError("empty training view")
    inv_cov = regularized_inverse_covariance(view.X)
    if k is None:
        usable = [c for c in candidates if c <= view.n]
        if not usable:
            usable = [1]
        smallest_cv_train = view.n - (view.n // folds + (1 if view.n % folds else 0))
        usable = [c for c in usable if c <= smallest_cv_train] or usable[:1]
        if len(usable) > 1 and view.n > folds:
            k = select_k(view, usable, folds, seed)
        else:
            k = usable[0]
    return KnnModel(X=view.X, y=view.y, k=int(k), inv_cov=inv_cov)
