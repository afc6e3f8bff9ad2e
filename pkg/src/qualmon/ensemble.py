"""Classifier pools, accuracy/diversity measures, member selection and fusion."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import TrainedClassifier, TrainingConfig, train_family
from .classifiers.mlp import MlpModel, RobustLmConfig, prune_mlp, train_mlp
from .data import DataView, bagging_sample

SCORE_FAMILIES = ("mlp", "svm")  # real-valued by construction; tree/knn scores are proportions


@dataclass
class ClassifierPool:
    """Trained members plus their cached validation predictions.

    Selection and fusion only read the prediction matrices, so pools built
    straight from matrices (members=None entries) work for analysis.
    """

    members: list
    families: list
    seeds: list
    val_classes: np.ndarray  # M x V hard classes
    val_scores: np.ndarray  # M x V scores in [0,1]
    val_truth: np.ndarray  # V
    failed: list = field(default_factory=list)

    def __post_init__(self):
        self.val_classes = np.asarray(self.val_classes, dtype=int)
        self.val_scores = np.asarray(self.val_scores, dtype=float)
        self.val_truth = np.asarray(self.val_truth, dtype=int)
        if self.val_classes.shape != (len(self.members), len(self.val_truth)):
            raise ValueError("prediction matrix shape must be |pool| x |validation|")
        if self.val_scores.shape != self.val_classes.shape:
            raise ValueError("score matrix shape must match class matrix")

    @property
    def size(self):
        return len(self.members)

    @property
    def errors(self):
        """Validation misclassification rate e_j per member."""
        return np.mean(self.val_classes != self.val_truth, axis=1)

    @property
    def wrong(self):
        return self.val_classes != self.val_truth

    @classmethod
    def from_predictions(cls, val_classes, val_truth, val_scores=None, members=None, families=None):
        val_classes = np.asarray(val_classes, dtype=int)
        m = val_classes.shape[0]
        return cls(
            members=list(members) if members is not None else [None] * m,
            families=list(families) if families is not None else ["?"] * m,
            seeds=[0] * m,
            val_classes=val_classes,
            val_scores=np.asarray(val_scores, dtype=float) if val_scores is not None else val_classes.astype(float),
            val_truth=val_truth,
        )

    def to_dict(self):
        return {
            "members": [m.to_dict() for m in self.members],
            "families": list(self.families),
            "seeds": [int(s) for s in self.seeds],
            "val_classes": ["".join(str(c) for c in row) for row in self.val_classes],
            "val_scores": self.val_scores.tolist(),
            "val_truth": "".join(str(c) for c in self.val_truth),
            "failed": list(self.failed),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            members=[TrainedClassifier.from_dict(m) for m in d["members"]],
            families=list(d["families"]),
            seeds=[int(s) for s in d["seeds"]],
            val_classes=np.asarray([[int(c) for c in row] for row in d["val_classes"]]),
            val_scores=np.asarray(d["val_scores"]),
            val_truth=np.asarray([int(c) for c in d["val_truth"]]),
            failed=list(d.get("failed", [])),
        )


def generate_pool(dataset, split, families, count, base_seed, config=None, workers=1):
    """Train `count` members per family; tree/knn/svm on independent bootstrap
    resamples, MLPs on the full training split with distinct init seeds.
    Validation predictions are cached on the returned pool."""
    if count < 1:
        raise ValueError("count must be >= 1")
    config = config or TrainingConfig()
    families = list(families)
    for f in families:
        if f not in ("tree", "knn", "mlp", "svm"):
            raise ValueError(f"unknown family {f!r}")
    X_train = dataset.X[split.train]
    y_train = dataset.y[split.train]
    X_val = dataset.X[split.validation]
    y_val = dataset.y[split.validation]

    total = len(families) * count
    seed_state = np.random.SeedSequence(base_seed).generate_state(total)
    jobs = []
    for fi, family in enumerate(families):
        for ci in range(count):
            seed = int(seed_state[fi * count + ci])
            jobs.append((family, seed))

    members, kept_families, kept_seeds, failed = [], [], [], []
    results = _run_jobs(jobs, X_train, y_train, X_val, y_val, config, workers)
    for (family, seed), outcome in zip(jobs, results):
        if isinstance(outcome, Exception):
            failed.append({"family": family, "seed": seed, "error": str(outcome)})
            continue
        members.append(outcome)
        kept_families.append(family)
        kept_seeds.append(seed)
    if not members:
        raise ValueError("every pool member failed to train")
    if failed:
        warnings.warn(f"{len(failed)} pool members failed to train")

    val_scores = np.vstack([m.score(X_val) for m in members])
    val_classes = (val_scores >= np.asarray([m.threshold for m in members])[:, None]).astype(int)
    return ClassifierPool(
        members=members,
        families=kept_families,
        seeds=kept_seeds,
        val_classes=val_classes,
        val_scores=val_scores,
        val_truth=y_val,
        failed=failed,
    )


def _train_one(family, X_train, y_train, X_val, y_val, seed, config):
    if family == "mlp":
        view = DataView(X=X_train, y=y_train)
        val_view = DataView(X=X_val, y=y_val)
    else:
        sample = bagging_sample(np.arange(len(y_train)), seed)
        view = DataView(X=X_train[sample], y=y_train[sample])
        val_view = None
    return train_family(family, view, seed, config=config, val_view=val_view)


def _train_one_packed(args):
    family, X_train, y_train, X_val, y_val, seed, config_dict = args
    try:
        return _train_one(family, X_train, y_train, X_val, y_val, seed, TrainingConfig.from_dict(config_dict))
    except Exception as exc:  # noqa: BLE001 - member failures recorded, not fatal
        return exc

def _run_jobs(jobs, X_train, y_train, X_val, y_val, config, workers):
    if workers <= 1:
        out = []
        for family, seed in jobs:
            try:
                out.append(_train_one(family, X_train, y_train, X_val, y_val, seed, config))
            except Exception as exc:  # noqa: BLE001
                out.append(exc)
        return out
    packed = [
        (family, X_train, y_train, X_val, y_val, seed, config.to_dict()) for family, seed in jobs
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_train_one_packed, packed))


# ---------------------------------------------------------------------------
# Accuracy and diversity measures
# ---------------------------------------------------------------------------

def mie(pool):
    """Minimum individual validation error and the index achieving it (first on ties)."""
    if pool.size == 0:
        raise ValueError("empty pool")
    errors = pool.errors
    idx = int(np.argmin(errors))
    return float(errors[idx]), idx


def pair_counts(preds_i, preds_j, truth):
    """(N11, N10, N01, N00) coincidence counts of two hard-prediction vectors."""
    preds_i = np.asarray(preds_i)
    preds_j = np.asarray(preds_j)
    truth = np.asarray(truth)
    if not (preds_i.shape == preds_j.shape == truth.shape):
        raise ValueError("prediction/truth length mismatch")
    if truth.size == 0:
        raise ValueError("empty prediction vectors")
    a = preds_i == truth
    b = preds_j == truth
    n11 = int(np.sum(a & b))
    n10 = int(np.sum(a & ~b))
    n01 = int(np.sum(~a & b))
    n00 = int(np.sum(~a & ~b))
    return n11, n10, n01, n00


def double_fault(preds_i, preds_j, truth):
    """Share of rows misclassified by both classifiers: N00 / N."""
    n11, n10, n01, n00 = pair_counts(preds_i, preds_j, truth)
    return n00 / (n11 + n10 + n01 + n00)


def df_to_ensemble(ensemble_preds, member_preds, truth):
    """Double fault between fused ensemble output and one candidate member."""
    return double_fault(ensemble_preds, member_preds, truth)


@dataclass
class DiversityMatrix:
    df: np.ndarray
    n11: np.ndarray
    n10: np.ndarray
    n01: np.ndarray
    n00: np.ndarray


def diversity_matrix(pool):
    """Pairwise double-fault matrix with the four coincidence counts."""
    correct = (~pool.wrong).astype(np.int64)
    wrong = pool.wrong.astype(np.int64)
    v = pool.val_classes.shape[1]
    n11 = correct @ correct.T
    n10 = correct @ wrong.T
    n01 = wrong @ correct.T
    n00 = wrong @ wrong.T
    return DiversityMatrix(df=n00 / v, n11=n11, n10=n10, n01=n01, n00=n00)


# ---------------------------------------------------------------------------
# Fusion
# ---------------------------------------------------------------------------

def fuse_vote(hard_preds):
    """Majority vote over hard classes; an exact tie counts as a defect."""
    votes = np.asarray(hard_preds, dtype=int)
    if votes.size == 0:
        raise ValueError("no member predictions")
    return int(2 * int(votes.sum()) >= len(votes))


def fuse_mean(scores, threshold=0.5):
    """Mean of member scores compared to the threshold; returns (mean, class)."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("no member scores")
    m = float(scores.mean())
    return m, int(m >= threshold)


def _fused_matrix(classes, scores, scheme, threshold):
    """Fuse an M x V prediction block into a V-vector of hard classes."""
    if scheme == "vote":
        return (2 * classes.sum(axis=0) >= classes.shape[0]).astype(int)
    if scheme == "mean":
        return (scores.mean(axis=0) >= threshold).astype(int)
    raise ValueError(f"selection supports vote/mean fusion, got {scheme!r}")


@dataclass
class EnsembleModel:
    """Ordered members plus a fusion rule; immutable once built."""

    members: list
    scheme: str  # vote | mean | trained
    threshold: float = 0.5
    fuser: MlpModel | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        if self.scheme not in ("vote", "mean", "trained"):
            raise ValueError(f"unknown fusion scheme {self.scheme!r}")
        if self.scheme == "trained":
            if self.fuser is None:
                raise ValueError("trained fusion requires a fuser model")
            if self.fuser.n_inputs != len(self.members):
                raise ValueError("fuser input width must equal member count")

    @property
    def size(self):
        return len(self.members)

    def member_outputs(self, X):
        """Per-member fusion inputs: scores for mlp/svm, hard classes for tree/knn."""
        rows = []
        for m in self.members:
            if m.family in SCORE_FAMILIES:
                rows.append(m.score(X))
            else:
                rows.append(m.predict_class(X).astype(float))
        return np.vstack(rows)

    def risk(self, X):
        """Defect-risk fraction per row under this ensemble's fusion scheme."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.scheme == "vote":
            classes = np.vstack([m.predict_class(X) for m in self.members])
            return classes.mean(axis=0)
        if self.scheme == "mean":
            scores = np.vstack([m.score(X) for m in self.members])
            return scores.mean(axis=0)
        return self.fuser.score(self.member_outputs(X).T)

    def predict(self, X):
        """(hard classes, risk fractions) per row."""
        risk = self.risk(X)
        return (risk >= self.threshold).astype(int), risk

    def to_dict(self):
        return {
            "members": [m.to_dict() for m in self.members],
            "scheme": self.scheme,
            "threshold": float(self.threshold),
            "fuser": self.fuser.to_dict() if self.fuser is not None else None,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            members=[TrainedClassifier.from_dict(m) for m in d["members"]],
            scheme=d["scheme"],
            threshold=float(d["threshold"]),
            fuser=MlpModel.from_dict(d["fuser"]) if d.get("fuser") else None,
            provenance=dict(d.get("provenance", {})),
        )


def ensemble_predict(ensemble, row):
    """Single-row convenience: (class, risk fraction)."""
    classes, risks = ensemble.predict(np.atleast_2d(row))
    return int(classes[0]), float(risks[0])


# ---------------------------------------------------------------------------
# Selection strategies
# ---------------------------------------------------------------------------

def _provenance(pool, strategy, scheme, indices, error):
    prov = {
        "strategy": strategy,
        "member_indices": [int(i) for i in indices],
        "families": [pool.families[i] for i in indices],
        "seeds": [int(pool.seeds[i]) for i in indices],
        "validation_error": float(error),
    }
    if scheme == "mean" and any(pool.families[i] in ("tree", "knn") for i in indices):
        prov["score_source"] = "mixed"  # proportions admitted as scores
    return prov


def _build(pool, indices, scheme, threshold, strategy, error, fuser=None):
    members = [pool.members[i] for i in indices]
    if any(m is None for m in members):
        members = [_Stub(i) for i in indices]  # matrix-only pools: keep selection usable
    return EnsembleModel(
        members=members,
        scheme=scheme,
        threshold=threshold,
        fuser=fuser,
        provenance=_provenance(pool, strategy, scheme, indices, error),
    )


@dataclass
class _Stub:
    index: int
    family: str = "?"

    def to_dict(self):
        raise ValueError("stub members cannot be serialized")


def accuracy_order(pool):
    """Member indices sorted by ascending validation error, ties by pool index."""
    return np.argsort(pool.errors, kind="stable")


def select_by_accuracy(pool, scheme="vote", threshold=0.5):
    """Best accuracy-ordered prefix by fused validation error (ties: shortest)."""
    if pool.size == 0:
        raise ValueError("empty pool")
    order = accuracy_order(pool)
    classes = pool.val_classes[order]
    scores = pool.val_scores[order]
    truth = pool.val_truth
    m, v = classes.shape
    if scheme == "vote":
        votes = np.cumsum(classes, axis=0)
        sizes = np.arange(1, m + 1)[:, None]
        fused = (2 * votes >= sizes).astype(int)
    elif scheme == "mean":
        running = np.cumsum(scores, axis=0) / np.arange(1, m + 1)[:, None]
        fused = (running >= threshold).astype(int)
    else:
        raise ValueError(f"selection supports vote/mean fusion, got {scheme!r}")
    errors = np.mean(fused != truth, axis=1)
    best = int(np.argmin(errors))  # first minimum -> smallest prefix
    indices = [int(i) for i in order[: best + 1]]
    return _build(pool, indices, scheme, threshold, "accuracy", errors[best])


def select_sad(pool, scheme="vote", initial_size=3, threshold=0.5):
    """Accuracy-seeded / diversity-grown selection.

    Seeds with the most accurate members, then repeatedly adds the remaining
    member with the lowest double fault against the fused ensemble output,
    recording the fused validation error at every size; the recorded ensemble
    with the lowest error wins, smallest on ties.
    """
    if pool.size == 0:
        raise ValueError("empty pool")
    if initial_size < 1:
        raise ValueError("initial size must be >= 1")
    order = accuracy_order(pool)
    truth = pool.val_truth
    wrong = pool.wrong.astype(np.int64)  # int matmul below counts double faults
    v = len(truth)

    current = [int(i) for i in order[: min(initial_size, pool.size)]]
    remaining = sorted(set(range(pool.size)) - set(current))

    def fused_of(indices):
        return _fused_matrix(pool.val_classes[indices], pool.val_scores[indices], scheme, threshold)

    recorded = []
    fused = fused_of(current)
    recorded.append((list(current), float(np.mean(fused != truth))))
    while remaining:
        ens_wrong = (fused != truth).astype(np.int64)
        dfs = (wrong[remaining] @ ens_wrong) / v
        pick = remaining[int(np.argmin(dfs))]  # ties: lowest pool index
        current = current + [pick]
        remaining.remove(pick)
        fused = fused_of(current)
        recorded.append((list(current), float(np.mean(fused != truth))))

    best_members, best_error = min(recorded, key=lambda it: it[1])  # first min: smallest
    return _build(pool, best_members, scheme, threshold, "sad", best_error)


def train_fuser(pool, train_view, val_view, seed, config=None, lm_config=None):
    """Fuse the whole pool with a trained network over member outputs.

    Member scores (hard classes for tree/knn) on the training rows feed an
    MLP; pruning may zero input columns, de-selecting those members. The
    returned ensemble keeps the surviving members and the compacted fuser.
    """
    if pool.size == 0:
        raise ValueError("empty pool")
    if any(m is None for m in pool.members):
        raise ValueError("trained fusion needs actual member models")
    cfg = config or TrainingConfig()
    lm = lm_config or RobustLmConfig(max_iter=cfg.mlp_max_iter)

    def outputs(X):
        rows = []
        for member, family in zip(pool.members, pool.families):
            if family in SCORE_FAMILIES:
                rows.append(member.score(X))
            else:
                rows.append(member.predict_class(X).astype(float))
        return np.vstack(rows).T

    fuser_train = DataView(X=outputs(train_view.X), y=train_view.y)
    fuser_val = DataView(X=outputs(val_view.X), y=val_view.y)
    hidden = max(1, math.ceil(pool.size / 10))
    fuser = train_mlp(fuser_train, hidden, seed, config=lm)
    fuser = prune_mlp(
        fuser, fuser_train, fuser_val, config=lm, retrain_iters=cfg.mlp_prune_retrain_iters
    )
    survivors = [int(i) for i in fuser.active_inputs()]
    compact = fuser.restrict_inputs(survivors)
    fused_val = (compact.score(fuser_val.X[:, survivors]) >= 0.5).astype(int)
    error = float(np.mean(fused_val != val_view.y))
    return _build(pool, survivors, "trained", 0.5, "pruning", error, fuser=compact)
