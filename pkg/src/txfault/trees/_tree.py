"""Array-backed binary trees and the greedy CART builders.

Nodes are stored in pre-order.  An internal node routes ``x[feature] <=
threshold`` to ``left`` and everything else to ``right``; a leaf has
``feature == -1``.  ``value`` holds class counts for classification trees
and a single output value for regression trees.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

LEAF = -1
# gains within this distance of the best count as ties
GAIN_TIE_EPS = 1e-12


def gini(counts) -> float:
    """Gini impurity ``1 - sum_k (c_k / N)^2`` of a class-count vector."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini impurity of an empty node is undefined")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def entropy(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("entropy of an empty node is undefined")
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _impurity_rows(counts: np.ndarray, totals: np.ndarray, criterion: str) -> np.ndarray:
    """Row-wise impurity of a (m, K) count matrix with row sums ``totals``."""
    p = counts / totals[:, None]
    if criterion == "gini":
        return 1.0 - np.einsum("ij,ij->i", p, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -np.einsum("ij,ij->i", p, logs)


CRITERIA = {"gini": gini, "entropy": entropy}


class Split(NamedTuple):
    feature: int
    threshold: float
    gain: float


def _midpoint(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid = (lo + hi) / 2.0
    # rounding can push the midpoint onto the upper value; fall back to lo
    return np.where(mid >= hi, lo, mid)


def _feature_candidates_cls(x: np.ndarray, y: np.ndarray, n_classes: int,
                            min_samples_leaf: int, criterion: str,
                            parent_impurity: float):
    """Gains and thresholds of all admissible splits on one feature."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    n = xs.size
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y[order]] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]          # left child = first i+1 samples
    n_left = np.arange(1, n, dtype=float)
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_samples_leaf) & (
        n - n_left >= min_samples_leaf)
    if not valid.any():
        return None, None
    pos = np.flatnonzero(valid)
    left = left[pos]
    nl = n_left[pos]
    nr = n - nl
    right = onehot.sum(axis=0) - left
    imp_l = _impurity_rows(left, nl, criterion)
    imp_r = _impurity_rows(right, nr, criterion)
    gain = parent_impurity - (nl / n) * imp_l - (nr / n) * imp_r
    thr = _midpoint(xs[pos], xs[pos + 1])
    return gain, thr


def _feature_candidates_reg(x: np.ndarray, target: np.ndarray,
                            min_samples_leaf: int):
    """Friedman improvement ``nl*nr/n * (mean_l - mean_r)^2`` per split."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ts = target[order]
    n = xs.size
    n_left = np.arange(1, n, dtype=float)
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_samples_leaf) & (
        n - n_left >= min_samples_leaf)
    if not valid.any():
        return None, None
    pos = np.flatnonzero(valid)
    csum = np.cumsum(ts)
    sl = csum[pos]
    nl = n_left[pos]
    nr = n - nl
    diff = sl / nl - (csum[-1] - sl) / nr
    improvement = nl * nr / n * diff * diff
    thr = _midpoint(xs[pos], xs[pos + 1])
    return improvement, thr


def _select(per_feature: list) -> Split | None:
    """Pick the best split: highest gain, ties to lowest feature index then
    lowest threshold (gains within ``GAIN_TIE_EPS`` of the best tie)."""
    per_feature = [(f, g, t) for f, g, t in per_feature if g is not None]
    if not per_feature:
        return None
    best = max(float(g.max()) for _, g, _ in per_feature)
    for f, g, t in sorted(per_feature, key=lambda item: item[0]):
        ok = g >= best - GAIN_TIE_EPS
        if ok.any():
            cand = np.flatnonzero(ok)
            i = cand[np.argmin(t[cand])]
            return Split(int(f), float(t[i]), max(float(g[i]), 0.0))
    return None


def best_split(X, y, feature_subset=None, min_samples_leaf: int = 1,
               criterion: str = "gini") -> Split | None:
    """Exhaustive best classification split of ``(X, y)``.

    Candidate thresholds are midpoints of consecutive distinct sorted values
    of each feature in ``feature_subset`` (all features by default).  Returns
    ``None`` when the labels are already pure or no threshold leaves at least
    ``min_samples_leaf`` samples on both sides.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    classes, y_enc = np.unique(np.asarray(y), return_inverse=True)
    if classes.size < 2 or X.shape[0] < 2:
        return None
    counts = np.bincount(y_enc, minlength=classes.size)
    parent = CRITERIA[criterion](counts)
    features = range(X.shape[1]) if feature_subset is None else feature_subset
    per_feature = []
    for f in features:
        g, t = _feature_candidates_cls(X[:, f], y_enc, classes.size,
                                       min_samples_leaf, criterion, parent)
        per_feature.append((f, g, t))
    return _select(per_feature)


@dataclass(eq=False)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray           # (n_nodes, n_outputs)
    n_samples: np.ndarray
    impurity: np.ndarray

    @property
    def node_count(self) -> int:
        return self.feature.size

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    @property
    def max_depth(self) -> int:
        depth = np.zeros(self.node_count, dtype=int)
        for i in range(self.node_count):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Index of the leaf reached by each row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
            "impurity": self.impurity.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.intp),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.intp),
            right=np.asarray(d["right"], dtype=np.intp),
            value=np.asarray(d["value"], dtype=float).reshape(len(d["feature"]), -1),
            n_samples=np.asarray(d["n_samples"], dtype=float),
            impurity=np.asarray(d["impurity"], dtype=float),
        )


class _Nodes:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right = [], [], [], []
        self.value, self.n_samples, self.impurity = [], [], []

    def add(self, value, n, impurity) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        self.n_samples.append(n)
        self.impurity.append(impurity)
        return len(self.feature) - 1

    def finish(self) -> Tree:
        return Tree(np.asarray(self.feature, dtype=np.intp),
                    np.asarray(self.threshold, dtype=float),
                    np.asarray(self.left, dtype=np.intp),
                    np.asarray(self.right, dtype=np.intp),
                    np.asarray(self.value, dtype=float),
                    np.asarray(self.n_samples, dtype=float),
                    np.asarray(self.impurity, dtype=float))


def _candidate_features(n_features: int, max_features: int, rng):
    """Feature visiting order for one node.

    Without subsampling all features are visited in index order.  With
    subsampling a random permutation is drawn; the first ``max_features``
    are always evaluated and the rest only while no admissible split has
    been found yet (so constant features cannot stall the node).
    """
    if rng is None or max_features >= n_features:
        return list(range(n_features)), n_features
    return list(rng.permutation(n_features)), max_features


def _search(X, idx, evaluate, n_features, max_features, rng):
    order, n_first = _candidate_features(n_features, max_features, rng)
    per_feature = []
    found = False
    for visited, f in enumerate(order):
        if visited >= n_first and found:
            break
        g, t = evaluate(X[idx, f])
        per_feature.append((f, g, t))
        found = found or g is not None
    return _select(per_feature)


def _grow(X: np.ndarray, n_samples: int, make_node, find_split, *, max_depth,
          min_samples_split: int, min_samples_leaf: int) -> Tree:
    """Depth-first growth with an explicit stack; nodes come out in pre-order.

    ``make_node(idx)`` returns ``(value, impurity, splittable)`` and
    ``find_split(idx, impurity)`` returns a :class:`Split` or ``None``.
    """
    max_depth = np.inf if max_depth is None else max_depth
    nodes = _Nodes()
    stack = [(np.arange(n_samples), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        value, impurity, splittable = make_node(idx)
        node = nodes.add(value, idx.size, impurity)
        if parent >= 0:
            if is_left:
                nodes.left[parent] = node
            else:
                nodes.right[parent] = node
        if (not splittable or depth >= max_depth or idx.size < min_samples_split
                or idx.size < 2 * min_samples_leaf):
            continue
        split = find_split(idx, impurity)
        if split is None:
            continue
        go_left = X[idx, split.feature] <= split.threshold
        nodes.feature[node] = split.feature
        nodes.threshold[node] = split.threshold
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))
    return nodes.finish()


def build_classification_tree(X: np.ndarray, y: np.ndarray, n_classes: int, *,
                              criterion: str = "gini", max_depth=None,
                              min_samples_split: int = 2,
                              min_samples_leaf: int = 1,
                              max_features: int | None = None,
                              rng: np.random.Generator | None = None) -> Tree:
    """Grow a classification tree on integer-encoded labels ``y``.

    Leaves hold the class counts of the samples reaching them.  Growth stops
    at pure nodes, at ``max_depth``, below ``min_samples_split`` or when no
    admissible split exists.
    """
    n_features = X.shape[1]
    max_features = n_features if max_features is None else max_features
    imp_fn = CRITERIA[criterion]

    def make_node(idx):
        counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        impurity = imp_fn(counts)
        return counts, impurity, impurity > 0.0

    def find_split(idx, impurity):
        yi = y[idx]
        return _search(
            X, idx,
            lambda col: _feature_candidates_cls(col, yi, n_classes,
                                                min_samples_leaf, criterion,
                                                impurity),
            n_features, max_features, rng)

    return _grow(X, X.shape[0], make_node, find_split, max_depth=max_depth,
                 min_samples_split=min_samples_split,
                 min_samples_leaf=min_samples_leaf)


def build_regression_tree(X: np.ndarray, target: np.ndarray, *, max_depth=None,
                          min_samples_split: int = 2, min_samples_leaf: int = 1,
                          max_features: int | None = None,
                          rng: np.random.Generator | None = None) -> Tree:
    """Grow a least-squares regression tree with Friedman-MSE split scores.

    Leaf values are the mean target; node impurity is the target variance.
    """
    n_features = X.shape[1]
    max_features = n_features if max_features is None else max_features

    def make_node(idx):
        t = target[idx]
        mean = float(t.mean())
        impurity = float(np.mean((t - mean) ** 2))
        return [mean], impurity, bool(np.ptp(t) > 0)

    def find_split(idx, impurity):
        t = target[idx]
        return _search(
            X, idx, lambda col: _feature_candidates_reg(col, t, min_samples_leaf),
            n_features, max_features, rng)

    return _grow(X, X.shape[0], make_node, find_split, max_depth=max_depth,
                 min_samples_split=min_samples_split,
                 min_samples_leaf=min_samples_leaf)


def impurity_importance(tree: Tree, n_features: int) -> np.ndarray:
    """Unnormalised weighted impurity decrease accumulated per feature.

    Each split node adds ``(N_p/N) * (I_p - N_l/N_p * I_l - N_r/N_p * I_r)``
    to its feature, with ``N`` the number of samples at the root.
    """
    out = np.zeros(n_features)
    total = tree.n_samples[0]
    for i in np.flatnonzero(~tree.is_leaf):
        l, r = tree.left[i], tree.right[i]
        n_p = tree.n_samples[i]
        decrease = (tree.impurity[i]
                    - tree.n_samples[l] / n_p * tree.impurity[l]
                    - tree.n_samples[r] / n_p * tree.impurity[r])
        out[tree.feature[i]] += n_p / total * decrease
    return out
