"""Comparison criteria: confusion counts, S01/FA/ND rates, the McNemar
paired-disagreement statistic, and stratified k-fold cross-validation."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import DataView, stratified_kfold


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with defect as the positive class."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.fn + self.fp + self.tn

    def to_dict(self):
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}

    @classmethod
    def from_dict(cls, d):
        return cls(tp=int(d["tp"]), fn=int(d["fn"]), fp=int(d["fp"]), tn=int(d["tn"]))


def confusion(truth, predictions):
    truth = np.asarray(truth, dtype=int)
    predictions = np.asarray(predictions, dtype=int)
    if truth.shape != predictions.shape or truth.size == 0:
        raise ValueError("truth and predictions must be equal nonempty vectors")
    for v in (truth, predictions):
        if not np.isin(v, (0, 1)).all():
            raise ValueError("values must be binary")
    return ConfusionMatrix(
        tp=int(np.sum((truth == 1) & (predictions == 1))),
        fn=int(np.sum((truth == 1) & (predictions == 0))),
        fp=int(np.sum((truth == 0) & (predictions == 1))),
        tn=int(np.sum((truth == 0) & (predictions == 0))),
    )


@dataclass(frozen=True)
class RateReport:
    """S01 plus false-alarm and non-detection rates; None marks an undefined
    rate (empty denominator), flagged rather than raised."""

    s01: float
    fa: float | None
    nd: float | None
    cm: ConfusionMatrix

    def to_dict(self):
        return {"s01": self.s01, "fa": self.fa, "nd": self.nd, "confusion": self.cm.to_dict()}


def rates(cm):
    """Exact-count rates; rounding happens only at display time."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    s01 = (cm.fn + cm.fp) / cm.total
    fa = cm.fp / (cm.fp + cm.tn) if (cm.fp + cm.tn) > 0 else None
    nd = cm.fn / (cm.fn + cm.tp) if (cm.fn + cm.tp) > 0 else None
    return RateReport(s01=s01, fa=fa, nd=nd, cm=cm)


def mcnemar_u(truth, preds_best, preds_other):
    """|N10 - N01| / sqrt(N10 + N01) and whether equality is rejected at 5%.

    N10 counts rows the best classifier gets right while the other errs;
    N01 the converse. Rejection threshold is U > 1.96.
    """
    truth = np.asarray(truth, dtype=int)
    a = np.asarray(preds_best, dtype=int) == truth
    b = np.asarray(preds_other, dtype=int) == truth
    if len(a) != len(truth) or len(b) != len(truth):
        raise ValueError("length mismatch")
    n10 = int(np.sum(a & ~b))
    n01 = int(np.sum(~a & b))
    if n10 + n01 == 0:
        raise ValueError("identical disagreement profile: N10 + N01 = 0")
    u = abs(n10 - n01) / np.sqrt(n10 + n01)
    return float(u), bool(u > 1.96)


@dataclass
class FoldResult:
    fold: int
    report: RateReport
    train_seconds: float

    def to_dict(self):
        return {"fold": self.fold, "train_seconds": self.train_seconds, **self.report.to_dict()}


@dataclass
class CrossValReport:
    k: int
    seed: int
    folds: list
    aggregates: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregates:
            self.aggregates = self._aggregate()

    def _aggregate(self):
        out = {}
        for metric in ("s01", "fa", "nd"):
            vals = [getattr(f.report, metric) for f in self.folds]
            kept = [v for v in vals if v is not None]
            if len(kept) < len(vals):
                warnings.warn(f"{len(vals) - len(kept)} folds with undefined {metric} excluded")
            out[metric] = _mean_std(kept)
        out["train_seconds"] = _mean_std([f.train_seconds for f in self.folds])
        return out

    def to_dict(self, include_timing=True):
        agg = dict(self.aggregates)
        folds = [f.to_dict() for f in self.folds]
        if not include_timing:
            agg.pop("train_seconds", None)
            for f in folds:
                f.pop("train_seconds", None)
        return {"k": self.k, "seed": self.seed, "folds": folds, "aggregates": agg}


def _mean_std(values):
    if not values:
        return {"mean": None, "std": None}
    arr = np.asarray(values, dtype=float)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
    }


def crossval(dataset, trainer, k, seed):
    """Stratified k-fold: train on k-1 folds, score the held fold.

    `trainer` is a callable (train_view, seed) -> predictor exposing
    predict_class; training wall-time is measured per fold.
    """
    assignment = stratified_kfold(dataset.y, k, seed)
    folds = []
    for fold in range(k):
        held = assignment.fold_indices(fold)
        rest = np.flatnonzero(assignment.fold_of != fold)
        view = DataView(X=dataset.X[rest], y=dataset.y[rest])
        t0 = time.perf_counter()
        try:
            predictor = trainer(view, seed + fold)
        except Exception as exc:
            raise RuntimeError(f"trainer failed on fold {fold}: {exc}") from exc
        elapsed = time.perf_counter() - t0
        preds = predictor.predict_class(dataset.X[held])
        folds.append(
            FoldResult(
                fold=fold,
                report=rates(confusion(dataset.y[held], preds)),
                train_seconds=elapsed,
            )
        )
    return CrossValReport(k=int(k), seed=int(seed), folds=folds)


# ---------------------------------------------------------------------------
# Plain-text rendering: aligned comparison tables for reports
# ---------------------------------------------------------------------------

def percent(value, digits=1):
    return "undef" if value is None else f"{100.0 * value:.{digits}f}%"


def render_rates_table(rows):
    """rows: list of (label, RateReport, U or None)."""
    header = ["", "error rate", "false alarm rate", "non-detection rate", "U"]
    body = [
        [label, percent(r.s01), percent(r.fa), percent(r.nd), "" if u is None else f"{u:.2f}"]
        for label, r, u in rows
    ]
    return _align([header] + body)


def render_confusion_table(label, cm):
    header = [label, "Defect (predicted)", "Non defect (predicted)", "accuracy"]
    pos = cm.tp + cm.fn
    neg = cm.fp + cm.tn
    body = [
        ["Defect", str(cm.tp), str(cm.fn), percent(cm.tp / pos, 2) if pos else "undef"],
        ["Non defect", str(cm.fp), str(cm.tn), percent(cm.tn / neg, 2) if neg else "undef"],
    ]
    return _align([header] + body)


def render_crossval_table(rows):
    """rows: list of (label, CrossValReport)."""
    header = ["", "S01 mean", "S01 std", "FA mean", "FA std", "ND mean", "ND std", "time mean (s)", "time std"]
    body = []
    for label, rep in rows:
        agg = rep.aggregates
        body.append(
            [
                label,
                percent(agg["s01"]["mean"]),
                percent(agg["s01"]["std"]),
                percent(agg["fa"]["mean"]),
                percent(agg["fa"]["std"]),
                percent(agg["nd"]["mean"]),
                percent(agg["nd"]["std"]),
                f"{agg['train_seconds']['mean']:.2f}",
                f"{agg['train_seconds']['std']:.2f}",
            ]
        )
    return _align([header] + body)


def _align(rows):
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)
