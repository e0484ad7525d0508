"""SMOTE oversampling and NearMiss-1 undersampling.

Distances are Euclidean on the features as given; callers rescale first
if the columns live on very different scales.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_X_y

ORIGINAL, SYNTHETIC, RETAINED = "original", "synthetic", "retained"
PROVENANCE = (ORIGINAL, SYNTHETIC, RETAINED)


@dataclass(frozen=True)
class SmoteResult:
    rows: np.ndarray
    k_used: int
    k_reduced: bool     # True when the minority class was too small for k


def _nearest(d: np.ndarray, k: int) -> np.ndarray:
    # stable argsort keeps the lower row index first among equal distances
    return np.argsort(d, axis=1, kind="stable")[:, :k]


def smote(minority, k: int = 5, n_synthetic: int = 100, seed=None) -> SmoteResult:
    """Interpolate ``n_synthetic`` new rows between minority neighbours.

    Each synthetic row is ``x + u * (nb - x)`` with ``x`` a uniformly drawn
    minority row, ``nb`` one of its ``k`` nearest minority neighbours and
    ``u ~ U[0, 1]``.  When the class has ``k`` rows or fewer, ``k`` drops to
    ``count - 1`` and ``k_reduced`` is set.
    """
    X = np.asarray(minority, dtype=float)
    if X.ndim != 2:
        raise ValueError("minority rows must form a 2-D array")
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"SMOTE needs at least 2 minority rows, got {n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if n_synthetic < 0:
        raise ValueError("n_synthetic must be non-negative")
    reduced = n <= k
    k_used = n - 1 if reduced else k
    d = cdist(X, X)
    np.fill_diagonal(d, np.inf)
    nbrs = _nearest(d, k_used)
    rng = np.random.default_rng(seed)
    base = rng.integers(0, n, size=n_synthetic)
    pick = rng.integers(0, k_used, size=n_synthetic)
    u = rng.random(n_synthetic)[:, None]
    x = X[base]
    rows = x + u * (X[nbrs[base, pick]] - x)
    return SmoteResult(rows, k_used, reduced)


def nearmiss(majority, minority, n_keep: int, n_neighbors: int = 3) -> np.ndarray:
    """Indices of the ``n_keep`` majority rows closest to the minority class.

    NearMiss-1 score: mean distance to the ``n_neighbors`` nearest minority
    rows.  Lower scores are kept first, ties go to the lower row index; the
    returned indices are sorted.
    """
    A = np.asarray(majority, dtype=float)
    B = np.asarray(minority, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ValueError("majority and minority must be 2-D with equal widths")
    if not 0 <= n_keep <= A.shape[0]:
        raise ValueError(f"n_keep={n_keep} exceeds the {A.shape[0]} majority rows")
    if B.shape[0] == 0:
        raise ValueError("minority class is empty")
    k = min(n_neighbors, B.shape[0])
    d = np.sort(cdist(A, B), axis=1)[:, :k]
    score = d.mean(axis=1)
    order = np.argsort(score, kind="stable")
    return np.sort(order[:n_keep])


@dataclass(frozen=True)
class BalancedSet:
    X: np.ndarray
    y: np.ndarray
    provenance: np.ndarray       # one of PROVENANCE per row
    k_reduced: bool = False

    def __post_init__(self):
        if not (len(self.X) == len(self.y) == len(self.provenance)):
            raise ValueError("X, y and provenance differ in length")

    def counts(self) -> dict:
        labels, n = np.unique(self.y, return_counts=True)
        return {str(l): int(c) for l, c in zip(labels, n)}


class SmoteNearMiss(BaseEstimator):
    """Two-class rebalancer with an imbalanced-learn style ``fit_resample``.

    Parameters
    ----------
    strategy : {"smote", "nearmiss", "both"}, default="smote"
        ``smote`` grows the minority to the target, ``nearmiss`` shrinks the
        majority to it, ``both`` meets halfway between the two counts.
    ratio : float, default=1.0
        Desired minority/majority count ratio after balancing.
    k_neighbors : int, default=5
    random_state : int or None
    """

    def __init__(self, strategy="smote", ratio=1.0, k_neighbors=5, random_state=None):
        self.strategy = strategy
        self.ratio = ratio
        self.k_neighbors = k_neighbors
        self.random_state = random_state

    def _targets(self, n_min: int, n_maj: int) -> tuple[int, int]:
        r = float(self.ratio)
        if self.strategy == "smote":
            return max(n_min, int(round(r * n_maj))), n_maj
        if self.strategy == "nearmiss":
            return n_min, max(n_min, min(n_maj, int(round(n_min / r))))
        if self.strategy == "both":
            mid = (n_min + n_maj) / 2.0
            t_maj = int(round(mid))
            return max(n_min, int(round(r * t_maj))), t_maj
        raise ValueError(f"unknown strategy {self.strategy!r}")

    def balance(self, X, y) -> BalancedSet:
        X, y = check_X_y(X, y, dtype=float)
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError("ratio must lie in (0, 1]")
        labels, counts = np.unique(y, return_counts=True)
        if labels.size != 2:
            raise ValueError(f"balancing needs exactly 2 classes, got {labels.size}")
        # equal counts: the later label is treated as majority
        i_min = int(np.argmin(counts))
        lab_min, lab_maj = labels[i_min], labels[1 - i_min]
        mi, ma = np.flatnonzero(y == lab_min), np.flatnonzero(y == lab_maj)
        t_min, t_maj = self._targets(mi.size, ma.size)

        keep = ma
        prov_maj = np.full(ma.size, ORIGINAL, dtype=object)
        if t_maj < ma.size:
            keep = ma[nearmiss(X[ma], X[mi], t_maj)]
            prov_maj = np.full(keep.size, RETAINED, dtype=object)

        parts_X = [X[mi], X[keep]]
        parts_y = [y[mi], y[keep]]
        parts_p = [np.full(mi.size, ORIGINAL, dtype=object), prov_maj]
        reduced = False
        if t_min > mi.size:
            res = smote(X[mi], self.k_neighbors, t_min - mi.size, self.random_state)
            reduced = res.k_reduced
            parts_X.append(res.rows)
            parts_y.append(np.full(res.rows.shape[0], lab_min, dtype=y.dtype))
            parts_p.append(np.full(res.rows.shape[0], SYNTHETIC, dtype=object))
        return BalancedSet(np.vstack(parts_X), np.concatenate(parts_y),
                           np.concatenate(parts_p), reduced)

    def fit_resample(self, X, y):
        out = self.balance(X, y)
        return out.X, out.y
