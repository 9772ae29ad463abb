"""Decision trees and a bagged forest with entropy-based binary splits.

Split selection minimizes the size-weighted child entropy (equivalently,
maximizes information gain). Numeric features are tested against thresholds
at midpoints between consecutive distinct sorted values; categorical features
use one-vs-rest tests per category. Ties are broken toward the lowest feature
index, then the lowest threshold or category code, so tree construction is
fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class NoValidSplit(Exception):
    """No candidate test improves the node: it becomes a leaf."""


def entropy_from_counts(counts) -> float:
    """Shannon entropy (natural log) of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def _entropy_stack(counts: np.ndarray) -> np.ndarray:
    """Entropy along the last axis of a non-negative count array."""
    totals = counts.sum(axis=-1, keepdims=True)
    safe = np.where(totals > 0, totals, 1.0)
    p = counts / safe
    logp = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logp).sum(axis=-1)


@dataclass(frozen=True)
class Split:
    """A binary test: rows go left when value <= threshold (numeric) or
    value == threshold (categorical)."""

    feature: int
    kind: str
    threshold: float
    gain: float
    child_entropy: float

    def goes_left(self, X: np.ndarray) -> np.ndarray:
        col = X[:, self.feature]
        if self.kind == NUMERIC:
            return col <= self.threshold
        return col == self.threshold


def _numeric_split_table(Xn, onehot, min_leaf):
    """Per-column best (weighted child entropy, threshold) for a block of
    numeric feature columns; entries are (inf, nan) when no test is valid."""
    n, m = Xn.shape
    order = np.argsort(Xn, axis=0)
    vals = np.take_along_axis(Xn, order, axis=0)
    cum = np.cumsum(onehot[order], axis=0)
    total = cum[-1]
    left = cum[:-1]
    right = total[None, :, :] - left
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    right_n = n - left_n
    weighted = (left_n * _entropy_stack(left) + right_n * _entropy_stack(right)) / n
    valid = (vals[:-1] < vals[1:]) & (left_n >= min_leaf) & (right_n >= min_leaf)
    weighted = np.where(valid, weighted, np.inf)
    pos = np.argmin(weighted, axis=0)
    cols = np.arange(m)
    best_w = weighted[pos, cols]
    thresholds = 0.5 * (vals[pos, cols] + vals[pos + 1, cols])
    return best_w, np.where(np.isfinite(best_w), thresholds, np.nan)


def _categorical_best(col, y, n_classes, min_leaf):
    """Best (weighted child entropy, category code) one-vs-rest test, or None."""
    n = len(col)
    codes, inverse = np.unique(col, return_inverse=True)
    counts = np.bincount(inverse * n_classes + y, minlength=len(codes) * n_classes)
    counts = counts.reshape(len(codes), n_classes).astype(np.float64)
    total = counts.sum(axis=0)
    left_n = counts.sum(axis=1)
    right_n = n - left_n
    weighted = (
        left_n * _entropy_stack(counts) + right_n * _entropy_stack(total[None, :] - counts)
    ) / n
    valid = (left_n >= min_leaf) & (right_n >= min_leaf)
    if not valid.any():
        return None
    weighted = np.where(valid, weighted, np.inf)
    j = int(np.argmin(weighted))
    return float(weighted[j]), float(codes[j])


def _categorical_split_table(Xc, y, n_classes, min_leaf):
    """Vectorized one-vs-rest search over a block of categorical columns
    whose values are small non-negative integer codes. Returns per-column
    (weighted child entropy, category code), with inf where nothing is valid.
    """
    n, q = Xc.shape
    codes = Xc.astype(np.intp)
    kmax = int(codes.max()) + 1
    flat = (np.arange(q)[None, :] * kmax + codes) * n_classes + y[:, None]
    counts = np.bincount(flat.ravel(), minlength=q * kmax * n_classes).astype(np.float64)
    counts = counts.reshape(q, kmax, n_classes)
    total = counts.sum(axis=1)
    left_n = counts.sum(axis=2)
    right_n = n - left_n
    weighted = (
        left_n * _entropy_stack(counts)
        + right_n * _entropy_stack(total[:, None, :] - counts)
    ) / n
    valid = (left_n >= min_leaf) & (right_n >= min_leaf)
    weighted = np.where(valid, weighted, np.inf)
    pos = np.argmin(weighted, axis=1)
    cols = np.arange(q)
    return weighted[cols, pos], pos.astype(np.float64)


def _is_small_int_block(block: np.ndarray) -> bool:
    return (
        block.size > 0
        and float(block.min()) >= 0.0
        and float(block.max()) < 256.0
        and bool(np.all(block == np.floor(block)))
    )


def entropy_best_split(X, y, feature_kinds, min_leaf: int = 1) -> Split:
    """The information-gain-maximizing binary test for a node.

    Expects at least ``2 * min_leaf`` rows and two distinct labels; raises
    NoValidSplit otherwise, or when every candidate either starves a child
    below ``min_leaf`` or yields no positive gain.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    n, p = X.shape
    if n < 2 * min_leaf:
        raise NoValidSplit(f"node has {n} rows, fewer than 2*min_leaf={2 * min_leaf}")
    n_classes = int(y.max()) + 1
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), y] = 1.0
    parent = entropy_from_counts(onehot.sum(axis=0))
    if parent == 0.0:
        raise NoValidSplit("node is pure")

    candidates: dict[int, tuple[float, str, float]] = {}
    num_idx = [f for f in range(p) if feature_kinds[f] == NUMERIC]
    cat_idx = [f for f in range(p) if feature_kinds[f] != NUMERIC]
    if num_idx:
        best_w, thresholds = _numeric_split_table(X[:, num_idx], onehot, min_leaf)
        for j, f in enumerate(num_idx):
            if np.isfinite(best_w[j]):
                candidates[f] = (float(best_w[j]), NUMERIC, float(thresholds[j]))
    if cat_idx:
        block = X[:, cat_idx]
        if _is_small_int_block(block):
            best_w, best_code = _categorical_split_table(block, y, n_classes, min_leaf)
            for j, f in enumerate(cat_idx):
                if np.isfinite(best_w[j]):
                    candidates[f] = (float(best_w[j]), CATEGORICAL, float(best_code[j]))
        else:
            for f in cat_idx:
                found = _categorical_best(X[:, f], y, n_classes, min_leaf)
                if found is not None:
                    candidates[f] = (found[0], CATEGORICAL, found[1])

    best: Split | None = None
    for f in range(p):
        if f not in candidates:
            continue
        weighted, kind, threshold = candidates[f]
        if best is None or weighted < best.child_entropy:
            best = Split(
                feature=f,
                kind=kind,
                threshold=threshold,
                gain=parent - weighted,
                child_entropy=weighted,
            )
    if best is None or best.gain <= 0.0:
        raise NoValidSplit("no candidate test yields positive information gain")
    return best


@dataclass
class _Node:
    prediction: int
    split: Split | None = None
    left: "_Node | None" = None
    right: "_Node | None" = None


def _majority(y: np.ndarray, n_classes: int) -> int:
    # ties resolved toward the lowest class code
    return int(np.argmax(np.bincount(y, minlength=n_classes)))


class DecisionTree:
    """A single entropy-split tree operating on encoded feature matrices."""

    def __init__(self, max_depth: int = 12, min_leaf: int = 2):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.root: _Node | None = None

    def fit(self, X, y, feature_kinds, n_classes: int | None = None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.intp)
        self.n_classes_ = n_classes if n_classes is not None else int(y.max()) + 1
        self.feature_kinds_ = tuple(feature_kinds)
        self.root = self._build(X, y, depth=0)
        return self

    def _build(self, X, y, depth: int) -> _Node:
        node = _Node(prediction=_majority(y, self.n_classes_))
        if depth >= self.max_depth or len(y) < 2 * self.min_leaf or len(np.unique(y)) < 2:
            return node
        try:
            split = entropy_best_split(X, y, self.feature_kinds_, self.min_leaf)
        except NoValidSplit:
            return node
        mask = split.goes_left(X)
        node.split = split
        node.left = self._build(X[mask], y[mask], depth + 1)
        node.right = self._build(X[~mask], y[~mask], depth + 1)
        return node

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.intp)
        stack = [(self.root, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if node.split is None or len(idx) == 0:
                out[idx] = node.prediction
                continue
            mask = node.split.goes_left(X[idx])
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
        return out


class RandomForest(BaseEstimator, ClassifierMixin):
    """Majority-vote ensemble of entropy-split trees.

    Each tree trains on a bootstrap resample drawn from a PCG64 stream seeded
    by ``random_state``; with a fixed seed the i-th tree is identical
    regardless of how many trees follow it, so accuracy curves over the tree
    count are prefix-consistent. Vote ties go to the lowest class code.
    """

    def __init__(
        self,
        n_trees: int = 10,
        max_depth: int = 12,
        min_leaf: int = 2,
        bootstrap: bool = True,
        random_state: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y, feature_kinds=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.classes_, y_codes = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes")
        kinds = tuple(feature_kinds) if feature_kinds is not None else (NUMERIC,) * X.shape[1]
        if len(kinds) != X.shape[1]:
            raise ValueError(f"feature_kinds has {len(kinds)} entries for {X.shape[1]} columns")
        rng = np.random.Generator(np.random.PCG64(self.random_state))
        n = len(y_codes)
        self.trees_ = []
        for _ in range(self.n_trees):
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = DecisionTree(max_depth=self.max_depth, min_leaf=self.min_leaf)
            tree.fit(X[idx], y_codes[idx], kinds, n_classes=len(self.classes_))
            self.trees_.append(tree)
        return self

    def predict_codes(self, X) -> np.ndarray:
        """Majority-vote class codes (indices into ``classes_``)."""
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros((len(X), len(self.classes_)), dtype=np.intp)
        for tree in self.trees_:
            pred = tree.predict(X)
            votes[np.arange(len(X)), pred] += 1
        return np.argmax(votes, axis=1)

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_codes(X)]
