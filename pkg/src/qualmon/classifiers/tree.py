"""Binary CART: exhaustive midpoint splits scored by Gini impurity decrease."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def gini_impurity(counts):
    """Gini impurity 1 - p0^2 - p1^2 of a two-class count pair."""
    n0, n1 = counts
    n = n0 + n1
    if n < 1:
        raise ValueError("empty node")
    p0 = n0 / n
    p1 = n1 / n
    return 1.0 - p0 * p0 - p1 * p1


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    klass: int = 0
    score: float = 0.0  # class-1 proportion at the leaf
    n: int = 0

    @property
    def is_leaf(self):
        return self.left is None

    def to_dict(self):
        if self.is_leaf:
            return {"class": self.klass, "score": self.score, "n": self.n}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        if "feature" not in d:
            return cls(klass=int(d["class"]), score=float(d["score"]), n=int(d["n"]))
        return cls(
            feature=int(d["feature"]),
            threshold=float(d["threshold"]),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


@dataclass
class TreeModel:
    root: TreeNode
    min_leaf: int
    max_depth: int

    def score(self, X):
        return np.asarray([self._leaf(row).score for row in np.atleast_2d(X)])

    def _leaf(self, row):
        node = self.root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node

    def depth(self):
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def node_count(self):
        def walk(node):
            return 1 if node.is_leaf else 1 + walk(node.left) + walk(node.right)

        return walk(self.root)

    def to_dict(self):
        return {"root": self.root.to_dict(), "min_leaf": self.min_leaf, "max_depth": self.max_depth}

    @classmethod
    def from_dict(cls, d):
        return cls(root=TreeNode.from_dict(d["root"]), min_leaf=int(d["min_leaf"]), max_depth=int(d["max_depth"]))


def _gini_vec(c0, c1):
    n = c0 + c1
    p0 = c0 / n
    p1 = c1 / n
    return 1.0 - p0 * p0 - p1 * p1


def best_split(X, y, min_leaf=1):
    """Best (feature, midpoint threshold) by Gini decrease; splits leaving a
    child below min_leaf are excluded. Ties keep the lowest feature index,
    then the lowest threshold. Zero-decrease splits are admissible (an impure
    node splits whenever a valid candidate exists, so patterns like XOR are
    still separated); returns None only when no candidate exists."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n = len(y)
    parent = gini_impurity((int(np.sum(y == 0)), int(np.sum(y == 1))))
    best = None
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="stable")
        vals = X[order, feature]
        ones = np.cumsum(y[order])
        # candidate split after position i wherever the sorted value changes
        cand = np.flatnonzero(vals[:-1] != vals[1:])
        if cand.size == 0:
            continue
        n_left = (cand + 1).astype(float)
        n_right = n - n_left
        valid = (n_left >= min_leaf) & (n_right >= min_leaf)
        cand = cand[valid]
        if cand.size == 0:
            continue
        n_left, n_right = n_left[valid], n_right[valid]
        c1_left = ones[cand].astype(float)
        c1_right = float(ones[-1]) - c1_left
        g_left = _gini_vec(n_left - c1_left, c1_left)
        g_right = _gini_vec(n_right - c1_right, c1_right)
        weighted = (n_left / n) * g_left + (n_right / n) * g_right
        decrease = parent - weighted
        pos = int(np.argmax(decrease))  # first max, so lowest threshold wins ties
        if best is None or decrease[pos] > best[2]:
            i = int(cand[pos])
            best = (feature, (vals[i] + vals[i + 1]) / 2.0, float(decrease[pos]))
    return best


def train_tree(view, min_leaf=5, max_depth=12):
    """Grow a CART tree on the view, stopping at pure nodes, min_leaf or max_depth."""
    if view.n < 1:
        raise ValueError("empty training view")

    def grow(X, y, depth):
        n1 = int(np.sum(y == 1))
        node = TreeNode(klass=int(n1 / len(y) >= 0.5), score=n1 / len(y), n=len(y))
        if n1 == 0 or n1 == len(y) or depth >= max_depth or len(y) < 2 * min_leaf:
            return node
        found = best_split(X, y, min_leaf=min_leaf)
        if found is None:
            return node
        feature, threshold, _ = found
        mask = X[:, feature] <= threshold
        node.feature = feature
        node.threshold = float(threshold)
        node.left = grow(X[mask], y[mask], depth + 1)
        node.right = grow(X[~mask], y[~mask], depth + 1)
        return node

    return TreeModel(root=grow(view.X, view.y, 0), min_leaf=int(min_leaf), max_depth=int(max_depth))
