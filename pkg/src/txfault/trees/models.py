"""Decision tree, random forest and gradient boosting classifiers.

All three follow the scikit-learn estimator protocol (``get_params``,
``fit``, ``predict``, ``predict_proba``, ``score``) so they can be cloned,
grid-searched and dropped into pipelines, but the learning itself is
implemented here on top of :mod:`txfault.trees._tree`.
"""
from __future__ import annotations

import math
import numbers

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._tree import (Tree, build_classification_tree, build_regression_tree,
                    impurity_importance)


def _check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _check_tree_params(est):
    if est.max_depth is not None:
        _check_positive_int(est.max_depth, "max_depth", 0)
    _check_positive_int(est.min_samples_split, "min_samples_split", 2)
    _check_positive_int(est.min_samples_leaf, "min_samples_leaf", 1)


def _resolve_max_features(max_features, n_features: int) -> int:
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(math.log2(n_features)))
    if isinstance(max_features, numbers.Integral):
        if not 1 <= max_features <= n_features:
            raise ValueError(f"max_features={max_features} outside [1, {n_features}]")
        return int(max_features)
    if isinstance(max_features, numbers.Real) and 0 < max_features <= 1:
        return max(1, int(max_features * n_features))
    raise ValueError(f"invalid max_features {max_features!r}")


class _FittedClassifier(ClassifierMixin, BaseEstimator):
    """Shared input handling for the classifiers below."""

    def _validate_fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        check_classification_targets(y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        self.n_classes_ = self.classes_.size
        self.n_features_in_ = X.shape[1]
        return X, y_enc

    def _validate_predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, but "
                             f"{type(self).__name__} expects {self.n_features_in_}")
        return X

    def predict(self, X):
        proba = self.predict_proba(X)
        # argmax keeps the first maximum, i.e. the lowest class index
        return self.classes_[np.argmax(proba, axis=1)]


class DecisionTreeClassifier(_FittedClassifier):
    """CART classification tree.

    Parameters
    ----------
    criterion : {"gini", "entropy"}, default="gini"
    max_depth : int or None, default=None
        ``None`` grows until leaves are pure or cannot be split.
    min_samples_split : int, default=2
    min_samples_leaf : int, default=1
    max_features : int, float, "sqrt", "log2" or None, default=None
        Features drawn at random per node; ``None`` scans all of them in
        index order (fully deterministic).
    random_state : int or None, default=None
        Only used when ``max_features`` subsamples.

    Attributes
    ----------
    tree_ : Tree
    classes_ : ndarray
    feature_importances_ : ndarray
        Normalised weighted gini decrease per feature.
    """

    def __init__(self, criterion="gini", max_depth=None, min_samples_split=2,
                 min_samples_leaf=1, max_features=None, random_state=None):
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y):
        X, y_enc = self._validate_fit(X, y)
        _check_tree_params(self)
        if self.criterion not in ("gini", "entropy"):
            raise ValueError(f"unknown criterion {self.criterion!r}")
        k = _resolve_max_features(self.max_features, X.shape[1])
        rng = np.random.default_rng(self.random_state) if k < X.shape[1] else None
        self.tree_ = build_classification_tree(
            X, y_enc, self.n_classes_, criterion=self.criterion,
            max_depth=self.max_depth, min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf, max_features=k, rng=rng)
        return self

    def predict_proba(self, X):
        X = self._validate_predict(X)
        counts = self.tree_.value[self.tree_.apply(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def apply(self, X):
        return self.tree_.apply(self._validate_predict(X))

    def get_depth(self) -> int:
        check_is_fitted(self, "tree_")
        return self.tree_.max_depth

    @property
    def feature_importances_(self):
        check_is_fitted(self, "tree_")
        return _normalise(impurity_importance(self.tree_, self.n_features_in_))


def _normalise(imp: np.ndarray) -> np.ndarray:
    total = imp.sum()
    return imp / total if total > 0 else imp


def _fit_forest_tree(X, y_enc, n_classes, seed, bootstrap, params):
    rng = np.random.default_rng(seed)
    if bootstrap:
        rows = rng.integers(0, X.shape[0], X.shape[0])
        Xb, yb = X[rows], y_enc[rows]
    else:
        Xb, yb = X, y_enc
    return build_classification_tree(Xb, yb, n_classes, rng=rng, **params)


class RandomForestClassifier(_FittedClassifier):
    """Bagged CART trees with per-node feature subsampling.

    Each tree is grown on a bootstrap resample drawn from its own seed; the
    per-tree seeds are spawned from ``random_state``.  Prediction is a
    majority vote of the trees, ties going to the lowest class index, and
    ``predict_proba`` returns the vote fractions.

    Parameters
    ----------
    n_estimators : int, default=100
    criterion, max_depth, min_samples_split, min_samples_leaf :
        As for :class:`DecisionTreeClassifier`.
    max_features : default="sqrt"
    bootstrap : bool, default=True
    random_state : int or None, default=None
    n_jobs : int or None, default=None
        Trees are grown in parallel with joblib; results do not depend on
        the schedule.
    """

    def __init__(self, n_estimators=100, criterion="gini", max_depth=None,
                 min_samples_split=2, min_samples_leaf=1, max_features="sqrt",
                 bootstrap=True, random_state=None, n_jobs=None):
        self.n_estimators = n_estimators
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y_enc = self._validate_fit(X, y)
        _check_tree_params(self)
        _check_positive_int(self.n_estimators, "n_estimators")
        k = _resolve_max_features(self.max_features, X.shape[1])
        ss = np.random.SeedSequence(self.random_state)
        self.tree_seeds_ = [int(c.generate_state(1, np.uint64)[0])
                            for c in ss.spawn(self.n_estimators)]
        params = dict(criterion=self.criterion, max_depth=self.max_depth,
                      min_samples_split=self.min_samples_split,
                      min_samples_leaf=self.min_samples_leaf, max_features=k)
        self.trees_ = Parallel(n_jobs=self.n_jobs)(
            delayed(_fit_forest_tree)(X, y_enc, self.n_classes_, seed,
                                      self.bootstrap, params)
            for seed in self.tree_seeds_)
        return self

    def _votes(self, X):
        votes = np.zeros((X.shape[0], self.n_classes_))
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            counts = tree.value[tree.apply(X)]
            votes[rows, np.argmax(counts, axis=1)] += 1
        return votes

    def predict_proba(self, X):
        X = self._validate_predict(X)
        return self._votes(X) / len(self.trees_)

    @property
    def feature_importances_(self):
        check_is_fitted(self, "trees_")
        per_tree = [_normalise(impurity_importance(t, self.n_features_in_))
                    for t in self.trees_]
        return np.mean(per_tree, axis=0)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _log_loss(scores: np.ndarray, y_enc: np.ndarray) -> float:
    z = scores - scores.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(logsum - z[np.arange(y_enc.size), y_enc]))


class GradientBoostingClassifier(_FittedClassifier):
    """Multinomial log-loss gradient boosting with regression trees.

    Scores start at the log class priors.  Each iteration fits, for every
    class, a Friedman-MSE regression tree to the residual ``onehot - p`` and
    replaces its leaf values with the one-step Newton estimate
    ``(K-1)/K * sum(r) / sum(|r| (1-|r|))`` before adding them scaled by
    ``learning_rate``.

    Parameters
    ----------
    learning_rate : float, default=0.1
    n_estimators : int, default=100
        Number of boosting iterations.
    max_depth : int, default=10
    min_samples_split : int, default=2
    min_samples_leaf : int, default=1
    criterion : {"friedman_mse"}, default="friedman_mse"
    random_state : int or None, default=None
        Accepted for API symmetry; fitting is deterministic.

    Attributes
    ----------
    estimators_ : list of list of Tree
        ``estimators_[i][k]`` is the tree of iteration ``i`` for class ``k``.
    init_scores_ : ndarray of shape (n_classes,)
    train_loss_ : ndarray
        Training log-loss before the first and after every iteration.
    """

    def __init__(self, learning_rate=0.1, n_estimators=100, max_depth=10,
                 min_samples_split=2, min_samples_leaf=1,
                 criterion="friedman_mse", random_state=None):
        self.learning_rate = learning_rate
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.criterion = criterion
        self.random_state = random_state

    def fit(self, X, y):
        X, y_enc = self._validate_fit(X, y)
        _check_tree_params(self)
        _check_positive_int(self.n_estimators, "n_estimators")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.criterion != "friedman_mse":
            raise ValueError(f"unsupported criterion {self.criterion!r}")
        n, K = X.shape[0], self.n_classes_
        prior = np.bincount(y_enc, minlength=K) / n
        self.init_scores_ = np.log(prior)
        self.estimators_ = []
        if K == 1:
            self.train_loss_ = np.zeros(1)
            return self
        onehot = np.zeros((n, K))
        onehot[np.arange(n), y_enc] = 1.0
        scores = np.tile(self.init_scores_, (n, 1))
        losses = [_log_loss(scores, y_enc)]
        for _ in range(self.n_estimators):
            proba = _softmax(scores)
            stage = []
            for k in range(K):
                residual = onehot[:, k] - proba[:, k]
                tree = build_regression_tree(
                    X, residual, max_depth=self.max_depth,
                    min_samples_split=self.min_samples_split,
                    min_samples_leaf=self.min_samples_leaf)
                leaves = tree.apply(X)
                _newton_leaves(tree, leaves, residual, K)
                scores[:, k] += self.learning_rate * tree.value[leaves, 0]
                stage.append(tree)
            self.estimators_.append(stage)
            losses.append(_log_loss(scores, y_enc))
        self.train_loss_ = np.asarray(losses)
        return self

    def decision_function(self, X):
        X = self._validate_predict(X)
        return self._raw_scores(X)

    def _raw_scores(self, X):
        scores = np.tile(self.init_scores_, (X.shape[0], 1))
        for stage in self.estimators_:
            for k, tree in enumerate(stage):
                scores[:, k] += self.learning_rate * tree.value[tree.apply(X), 0]
        return scores

    def staged_decision_function(self, X):
        X = self._validate_predict(X)
        scores = np.tile(self.init_scores_, (X.shape[0], 1))
        for stage in self.estimators_:
            for k, tree in enumerate(stage):
                scores[:, k] += self.learning_rate * tree.value[tree.apply(X), 0]
            yield scores.copy()

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))

    @property
    def feature_importances_(self):
        check_is_fitted(self, "estimators_")
        trees = [t for stage in self.estimators_ for t in stage]
        if not trees:
            return np.zeros(self.n_features_in_)
        return _normalise(np.mean([impurity_importance(t, self.n_features_in_)
                                   for t in trees], axis=0))


def _newton_leaves(tree: Tree, leaves: np.ndarray, residual: np.ndarray,
                   n_classes: int) -> None:
    """Overwrite leaf values with the multinomial Newton step."""
    num = np.bincount(leaves, weights=residual, minlength=tree.node_count)
    den = np.bincount(leaves, weights=np.abs(residual) * (1.0 - np.abs(residual)),
                      minlength=tree.node_count)
    factor = (n_classes - 1) / n_classes
    step = np.zeros(tree.node_count)
    ok = den > 1e-150
    step[ok] = factor * num[ok] / den[ok]
    is_leaf = tree.is_leaf
    tree.value[is_leaf, 0] = step[is_leaf]
