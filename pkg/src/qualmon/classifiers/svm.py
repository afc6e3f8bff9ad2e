"""Soft-margin RBF support-vector classifier trained by sequential minimal
optimization, following Platt's working-pair heuristics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def rbf_kernel(x, y, gamma):
    """exp(-gamma * ||x - y||^2)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(np.exp(-gamma * float(diff @ diff)))


def rbf_matrix(A, B, gamma):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class SvmModel:
    support_X: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i, y in {-1,+1}, for rows with alpha > 0
    bias: float
    gamma: float
    C: float

    def __post_init__(self):
        self.support_X = np.atleast_2d(np.asarray(self.support_X, dtype=float))
        self.dual_coef = np.asarray(self.dual_coef, dtype=float)
        self.bias = float(self.bias)

    def decision(self, X):
        return rbf_matrix(np.atleast_2d(X), self.support_X, self.gamma) @ self.dual_coef + self.bias

    def score(self, X):
        """Fixed-slope sigmoid of the margin: monotone, threshold 0.5 at the boundary."""
        return 1.0 / (1.0 + np.exp(-np.clip(self.decision(X), -500, 500)))

    def to_dict(self):
        return {
            "support_X": self.support_X.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
            "C": self.C,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            support_X=np.asarray(d["support_X"]),
            dual_coef=np.asarray(d["dual_coef"]),
            bias=float(d["bias"]),
            gamma=float(d["gamma"]),
            C=float(d["C"]),
        )


def kkt_violations(decision, t, alphas, C, tol, atol=None):
    """Per-row violation of the soft-margin KKT conditions, for checking.

    `atol` classifies alphas as at-bound; defaults to 1e-8 * max(1, C) so a
    numerically tiny alpha is audited as zero rather than free.
    """
    if atol is None:
        atol = 1e-8 * max(1.0, C)
    margins = t * decision
    at_zero = alphas <= atol
    at_c = alphas >= C - atol
    free = ~at_zero & ~at_c
    viol = np.zeros(len(t))
    viol[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    viol[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    viol[free] = np.abs(margins[free] - 1.0)
    return viol


class _SmoState:
    def __init__(self, X, t, C, gamma, tol, seed):
        self.X = X
        self.t = t
        self.C = C
        self.tol = tol
        self.n = len(t)
        self.K = rbf_matrix(X, X, gamma)
        self.alphas = np.zeros(self.n)
        self.b = 0.0
        # with all alphas zero, f(x) = b, so E_i = b - t_i
        self.E = np.full(self.n, self.b) - t
        self.rng = np.random.default_rng(seed)

    def take_step(self, i1, i2):
        if i1 == i2:
            return False
        a1, a2 = self.alphas[i1], self.alphas[i2]
        t1, t2 = self.t[i1], self.t[i2]
        e1, e2 = self.E[i1], self.E[i2]
        s = t1 * t2
        if s > 0:
            lo, hi = max(0.0, a1 + a2 - self.C), min(self.C, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(self.C, self.C + a2 - a1)
        if lo >= hi:
            return False
        k11, k12, k22 = self.K[i1, i1], self.K[i1, i2], self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = a2 + t2 * (e1 - e2) / eta
            a2_new = min(max(a2_new, lo), hi)
        else:
            # flat direction (duplicate rows): evaluate the objective at both ends
            f1 = t1 * (e1 - self.b) - a1 * k11 - s * a2 * k12
            f2 = t2 * (e2 - self.b) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - lo)
            h1 = a1 + s * (a2 - hi)
            obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12
            obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12
            if obj_lo < obj_hi - 1e-12:
                a2_new = lo
            elif obj_lo > obj_hi + 1e-12:
                a2_new = hi
            else:
                return False
        if abs(a2_new - a2) < 1e-8 * (a2_new + a2 + 1e-8):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        if a1_new < 0.0:
            a2_new += s * a1_new
            a1_new = 0.0
        elif a1_new > self.C:
            a2_new += s * (a1_new - self.C)
            a1_new = self.C

        b1 = self.b - e1 - t1 * (a1_new - a1) * k11 - t2 * (a2_new - a2) * k12
        b2 = self.b - e2 - t1 * (a1_new - a1) * k12 - t2 * (a2_new - a2) * k22
        if 0.0 < a1_new < self.C:
            b_new = b1
        elif 0.0 < a2_new < self.C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        self.E += (
            t1 * (a1_new - a1) * self.K[i1]
            + t2 * (a2_new - a2) * self.K[i2]
            + (b_new - self.b)
        )
        self.alphas[i1], self.alphas[i2] = a1_new, a2_new
        self.b = b_new
        return True

    def examine(self, i2):
        t2, a2, e2 = self.t[i2], self.alphas[i2], self.E[i2]
        r2 = e2 * t2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0)):
            return False
        non_bound = np.flatnonzero((self.alphas > 0) & (self.alphas < self.C))
        if len(non_bound) > 1:
            i1 = int(non_bound[np.argmax(np.abs(self.E[non_bound] - e2))])
            if self.take_step(i1, i2):
                return True
        if len(non_bound):
            start = self.rng.integers(len(non_bound))
            for i1 in np.roll(non_bound, -start):
                if self.take_step(int(i1), i2):
                    return True
        start = self.rng.integers(self.n)
        for i1 in np.roll(np.arange(self.n), -start):
            if self.take_step(int(i1), i2):
                return True
        return False

    def refresh_errors(self):
        decision = self.K @ (self.alphas * self.t) + self.b
        self.E = decision - self.t
        return decision


def train_svm(view, C=10.0, gamma=None, tol=1e-3, seed=0, max_rounds=200, with_alphas=False):
    """Solve the soft-margin dual to KKT tolerance; returns the sparse model.

    with_alphas=True also returns the full alpha vector (training-row order)
    so callers can run an independent KKT audit.
    """
    X = view.X
    y = view.y
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate labels: both classes required")
    if gamma is None:
        gamma = 1.0 / X.shape[1]
    t = np.where(y == 1, 1.0, -1.0)
    state = _SmoState(X, t, float(C), float(gamma), float(tol), seed)

    for _ in range(max_rounds):
        num_changed = 0
        examine_all = True
        while True:
            changed = 0
            targets = (
                range(state.n)
                if examine_all
                else np.flatnonzero((state.alphas > 0) & (state.alphas < C))
            )
            for i2 in targets:
                changed += state.examine(int(i2))
            num_changed += changed
            if examine_all:
                if changed == 0:
                    break
                examine_all = False
            elif changed == 0:
                examine_all = True
        # error cache drifts over many incremental updates: verify exactly
        decision = state.refresh_errors()
        if np.max(kkt_violations(decision, t, state.alphas, C, tol)) <= tol:
            break
        if num_changed == 0:
            break

    state.alphas[state.alphas < 1e-10] = 0.0  # numerical dust, << tol in effect
    support = np.flatnonzero(state.alphas > 0)
    model = SvmModel(
        support_X=X[support].copy(),
        dual_coef=(state.alphas * t)[support],
        bias=state.b,
        gamma=float(gamma),
        C=float(C),
    )
    return (model, state.alphas.copy()) if with_alphas else model
