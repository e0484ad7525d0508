"""Holdout splitting, grid search and forest-based feature ranking."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import clone

from .metrics import accuracy
from .models import RandomForestClassifier


def stratified_split(y, test_size: float = 0.2, random_state=None):
    """Seeded per-class holdout split.

    Every class contributes ``round(test_size * n_c)`` rows to the test
    side, so class proportions are preserved to within one sample.
    Returns sorted ``(train_idx, test_idx)``.
    """
    if not 0.0 < test_size < 1.0:
        raise ValueError("test_size must lie in (0, 1)")
    y = np.asarray(y)
    rng = np.random.default_rng(random_state)
    train, test = [], []
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        n_test = int(round(test_size * idx.size))
        test.append(idx[:n_test])
        train.append(idx[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


@dataclass(frozen=True)
class GridSearchResult:
    best_params: dict
    best_score: float
    table: tuple[tuple[dict, float], ...]


def _expand(param_grid: Mapping[str, Sequence]) -> list[dict]:
    keys = list(param_grid)
    for k in keys:
        if len(param_grid[k]) == 0:
            raise ValueError(f"parameter {k!r} has no candidate values")
    return [dict(zip(keys, combo))
            for combo in itertools.product(*(param_grid[k] for k in keys))]


def grid_search(estimator, param_grid: Mapping[str, Sequence], X, y, *,
                test_size: float = 0.2, random_state=None) -> GridSearchResult:
    """Exhaustive holdout search over ``param_grid``.

    Candidates are enumerated in the grid's key order (the last key varies
    fastest) and scored by holdout accuracy on one seeded stratified split.
    The first candidate reaching the best score wins.
    """
    if not param_grid:
        raise ValueError("param_grid is empty")
    candidates = _expand(param_grid)
    X = np.asarray(X)
    y = np.asarray(y)
    tr, te = stratified_split(y, test_size, random_state)
    table = []
    for params in candidates:
        model = clone(estimator).set_params(**params).fit(X[tr], y[tr])
        table.append((params, accuracy(y[te], model.predict(X[te]))))
    best_params, best_score = table[0]
    for params, score in table[1:]:
        if score > best_score:
            best_params, best_score = params, score
    return GridSearchResult(dict(best_params), best_score, tuple(table))


@dataclass(frozen=True)
class FeatureRanking:
    names: tuple[str, ...]
    importances: tuple[float, ...]

    def top(self, k: int) -> list[str]:
        return list(self.names[:k])


def rank_features(X, y, names: Sequence[str], random_state=0, *,
                  n_estimators: int = 200, n_jobs=None) -> FeatureRanking:
    """Order features by random-forest impurity importance (descending).

    Equal importances are ordered by feature name.
    """
    y = np.asarray(y)
    if np.unique(y).size < 2:
        raise ValueError("ranking needs at least two classes")
    names = list(names)
    X = np.asarray(X, dtype=float)
    if X.shape[1] != len(names):
        raise ValueError("number of names does not match the feature columns")
    forest = RandomForestClassifier(n_estimators=n_estimators,
                                    random_state=random_state, n_jobs=n_jobs)
    imp = forest.fit(X, y).feature_importances_
    order = sorted(range(len(names)), key=lambda i: (-imp[i], names[i]))
    return FeatureRanking(tuple(names[i] for i in order),
                          tuple(float(imp[i]) for i in order))
