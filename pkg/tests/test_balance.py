import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from txfault.balance import SmoteNearMiss, nearmiss, smote


def test_smote_count_and_determinism():
    X = np.random.default_rng(0).standard_normal((20, 3))
    a = smote(X, 5, 100, seed=1)
    assert a.rows.shape == (100, 3) and a.k_used == 5 and not a.k_reduced
    np.testing.assert_array_equal(a.rows, smote(X, 5, 100, seed=1).rows)


def test_smote_identical_points():
    X = np.tile([[1.5, -2.0]], (6, 1))
    np.testing.assert_array_equal(smote(X, 3, 40, seed=0).rows, np.tile(X[:1], (40, 1)))


def test_smote_two_points_on_segment():
    a, b = np.array([0.0, 4.0]), np.array([2.0, 1.0])
    rows = smote(np.stack([a, b]), k=1, n_synthetic=50, seed=2).rows
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    assert np.all((rows >= lo) & (rows <= hi))
    # collinear with a and b
    t = (rows[:, 0] - a[0]) / (b[0] - a[0])
    np.testing.assert_allclose(rows[:, 1], a[1] + t * (b[1] - a[1]))


def test_smote_reduces_k_and_flags():
    res = smote(np.arange(6.0).reshape(3, 2), k=5, n_synthetic=4, seed=0)
    assert res.k_used == 2 and res.k_reduced


def test_smote_needs_two_rows():
    with pytest.raises(ValueError):
        smote([[1.0, 2.0]], 1, 5)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(1, 5), st.integers(0, 10 ** 6))
def test_smote_rows_within_minority_bounds(n, k, seed):
    X = np.random.default_rng(seed).uniform(-3, 3, size=(n, 2))
    rows = smote(X, k, 25, seed).rows
    assert np.all(rows >= X.min(axis=0) - 1e-12) and np.all(rows <= X.max(axis=0) + 1e-12)


def test_nearmiss_identity_and_zero_distance():
    maj = np.array([[10.0, 10.0], [0.0, 0.0], [-9.0, 8.0]])
    mino = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]])
    assert nearmiss(maj, mino, 3).tolist() == [0, 1, 2]
    assert nearmiss(maj, mino, 1).tolist() == [1]


def test_nearmiss_matches_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        maj, mino = rng.standard_normal((10, 3)), rng.standard_normal((6, 3))
        assert nearmiss(maj, mino, 3).tolist() == oracles.nearmiss(maj, mino, 3)


def test_nearmiss_ties_by_index():
    maj = np.array([[1.0], [-1.0], [1.0]])
    assert nearmiss(maj, np.array([[0.0]]), 2).tolist() == [0, 1]


def test_nearmiss_too_many():
    with pytest.raises(ValueError):
        nearmiss(np.zeros((2, 1)), np.zeros((1, 1)), 3)


def _imbalanced(seed=0):
    rng = np.random.default_rng(seed)
    X = np.r_[rng.normal(0, 1, (80, 2)), rng.normal(4, 1, (12, 2))]
    y = np.array(["maj"] * 80 + ["min"] * 12)
    return X, y


def test_sampler_smote_parity_and_provenance():
    X, y = _imbalanced()
    out = SmoteNearMiss(random_state=0).balance(X, y)
    assert out.counts() == {"maj": 80, "min": 80}
    syn = out.provenance == "synthetic"
    assert syn.sum() == 68 and set(out.y[syn]) == {"min"}
    # originals untouched and first in order
    np.testing.assert_array_equal(out.X[:12], X[y == "min"])
    np.testing.assert_array_equal(out.X[12:92], X[y == "maj"])


def test_sampler_nearmiss_and_both():
    X, y = _imbalanced()
    nm = SmoteNearMiss(strategy="nearmiss").balance(X, y)
    assert nm.counts() == {"maj": 12, "min": 12}
    assert set(nm.provenance[nm.y == "maj"]) == {"retained"}
    both = SmoteNearMiss(strategy="both", random_state=1).balance(X, y)
    assert both.counts() == {"maj": 46, "min": 46}


def test_sampler_ratio():
    X, y = _imbalanced()
    out = SmoteNearMiss(ratio=0.5, random_state=0).balance(X, y)
    assert out.counts() == {"maj": 80, "min": 40}


def test_sampler_fit_resample_and_errors():
    X, y = _imbalanced()
    Xr, yr = SmoteNearMiss(random_state=0).fit_resample(X, y)
    assert Xr.shape == (160, 2)
    with pytest.raises(ValueError):
        SmoteNearMiss().balance(X, np.zeros(len(y)))
    with pytest.raises(ValueError):
        SmoteNearMiss(strategy="adasyn").balance(X, y)
