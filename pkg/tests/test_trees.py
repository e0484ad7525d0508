import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

import oracles
from txfault.trees import (DecisionTreeClassifier, EvalReport, EvalRow,
                           GradientBoostingClassifier, RandomForestClassifier,
                           accuracy, best_split, dumps, evaluate,
                           feature_importance, gini, grid_search, loads,
                           rank_features, report_from_predictions,
                           stratified_split)


def blobs(n=120, d=3, k=3, seed=0, spread=0.6):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-5, 5, size=(k, d))
    y = rng.integers(0, k, size=n)
    return centers[y] + spread * rng.standard_normal((n, d)), y


# -- impurity and split search -------------------------------------------------------

def test_gini_fixtures():
    assert gini([10, 0]) == 0.0
    assert gini([5, 5]) == 0.5
    assert math.isclose(gini([1] * 7), 6 / 7)
    with pytest.raises(ValueError):
        gini([0, 0])


def test_best_split_hand_example():
    s = best_split([[1], [2], [9], [10]], [0, 0, 1, 1])
    assert (s.feature, s.threshold, s.gain) == (0, 5.5, 0.5)


def test_best_split_pure_is_none():
    assert best_split([[1], [2], [3]], [1, 1, 1]) is None


def test_best_split_identical_columns_prefer_lower_index():
    X = np.array([[1, 1], [2, 2], [3, 3], [4, 4]], dtype=float)
    assert best_split(X, [0, 0, 1, 1]).feature == 0


def test_best_split_min_samples_leaf():
    assert best_split([[1], [2]], [0, 1], min_samples_leaf=2) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 50), st.integers(1, 4), st.integers(2, 3), st.integers(0, 10 ** 6))
def test_best_split_matches_oracle(n, d, k, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(n, d)).astype(float)
    y = rng.integers(0, k, size=n)
    got, want = best_split(X, y), oracles.best_split(X, y)
    if want is None:
        assert got is None
    else:
        assert (got.feature, got.threshold) == want[:2]
        assert math.isclose(got.gain, want[2], abs_tol=1e-12)
        assert got.gain >= 0


# -- decision tree --------------------------------------------------------------------

def test_dt_separable_depth_one():
    dt = DecisionTreeClassifier().fit([[0], [1], [5], [6]], ["a", "a", "b", "b"])
    assert dt.get_depth() == 1
    assert dt.score([[0], [1], [5], [6]], ["a", "a", "b", "b"]) == 1.0


def test_dt_xor():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([0, 1, 1, 0])
    dt = DecisionTreeClassifier().fit(X, y)
    assert dt.get_depth() == 2 and dt.score(X, y) == 1.0


def test_dt_contradictory_duplicates_majority():
    dt = DecisionTreeClassifier().fit([[1], [1], [1]], [0, 1, 1])
    assert dt.predict([[1]])[0] == 1
    np.testing.assert_allclose(dt.predict_proba([[1]]), [[1 / 3, 2 / 3]])


def test_dt_threshold_routes_left():
    dt = DecisionTreeClassifier().fit([[1], [2], [9], [10]], [0, 0, 1, 1])
    assert dt.predict([[5.5]])[0] == 0
    assert dt.predict([[5.5000001]])[0] == 1


def test_dt_tie_goes_to_lowest_class():
    dt = DecisionTreeClassifier().fit([[1], [1]], ["b", "a"])
    assert dt.predict([[1]])[0] == "a"


def test_dt_dimension_mismatch():
    dt = DecisionTreeClassifier().fit([[1, 2], [3, 4]], [0, 1])
    with pytest.raises(ValueError):
        dt.predict([[1, 2, 3]])
    with pytest.raises(ValueError):
        DecisionTreeClassifier().fit([[1], [2]], [0, 1, 1])


def test_dt_leaf_counts_sum_to_samples():
    X, y = blobs()
    tree = DecisionTreeClassifier(max_depth=3).fit(X, y).tree_
    leaves = tree.feature == -1
    np.testing.assert_array_equal(tree.value[leaves].sum(axis=1), tree.n_samples[leaves])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_dt_monotone_transform_invariance(seed):
    X, y = blobs(60, seed=seed)
    a = DecisionTreeClassifier().fit(X, y).predict(X)
    Z = np.exp(X / 3.0) + X ** 3
    b = DecisionTreeClassifier().fit(Z, y).predict(Z)
    np.testing.assert_array_equal(a, b)


def test_importance_single_informative_feature():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((300, 5))
    y = (X[:, 2] > 0).astype(int)
    imp = feature_importance(DecisionTreeClassifier().fit(X, y))
    assert imp[2] > 0.8 and math.isclose(imp.sum(), 1.0)


def test_importance_depth_one_and_stump():
    dt = DecisionTreeClassifier(max_depth=1).fit([[0, 5], [1, 3], [5, 1], [6, 0]], [0, 0, 1, 1])
    assert dt.feature_importances_.tolist() == [1.0, 0.0]
    leaf = DecisionTreeClassifier().fit([[0, 0], [1, 1]], [1, 1])
    assert leaf.feature_importances_.tolist() == [0.0, 0.0]


# -- random forest ----------------------------------------------------------------------

def test_rf_degenerate_equals_dt():
    X, y = blobs(seed=4)
    rf = RandomForestClassifier(n_estimators=1, bootstrap=False, max_features=None,
                                random_state=0).fit(X, y)
    dt = DecisionTreeClassifier().fit(X, y)
    Q = np.random.default_rng(9).uniform(-6, 6, size=(500, 3))
    np.testing.assert_array_equal(rf.predict(Q), dt.predict(Q))


def test_rf_seeded_repeat_identical():
    X, y = blobs(seed=2)
    a = RandomForestClassifier(n_estimators=15, random_state=3).fit(X, y)
    b = RandomForestClassifier(n_estimators=15, random_state=3).fit(X, y)
    assert dumps(a) == dumps(b)


def test_rf_parallel_equals_serial():
    X, y = blobs(seed=2)
    a = RandomForestClassifier(n_estimators=8, random_state=3, n_jobs=1).fit(X, y)
    b = RandomForestClassifier(n_estimators=8, random_state=3, n_jobs=2).fit(X, y)
    assert [t.to_dict() for t in a.trees_] == [t.to_dict() for t in b.trees_]


def test_rf_order_invariant_and_majority_vote():
    X, y = blobs(seed=5)
    rf = RandomForestClassifier(n_estimators=9, random_state=0).fit(X, y)
    before = rf.predict(X)
    rf.trees_ = rf.trees_[::-1]
    np.testing.assert_array_equal(rf.predict(X), before)


def test_rf_three_tree_vote():
    rf = RandomForestClassifier(n_estimators=3, bootstrap=False, random_state=0)
    rf.fit([[0], [1]], [0, 1])
    # force votes {0, 0, 1} by swapping one tree for a constant-1 tree
    one = DecisionTreeClassifier().fit([[0], [1]], [1, 1]).tree_
    one.value = np.array([[0.0, 1.0]])
    zero = DecisionTreeClassifier().fit([[0], [1]], [0, 0]).tree_
    zero.value = np.array([[1.0, 0.0]])
    rf.trees_ = [zero, zero, one]
    assert rf.predict([[0.5]])[0] == 0


def test_rank_features_finds_determining_feature():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((200, 4))
    y = (X[:, 3] > 0.2).astype(int)
    r = rank_features(X, y, ["f0", "f1", "f2", "f3"], random_state=0, n_estimators=40)
    assert r.names[0] == "f3"
    assert len(r.top(3)) == 3
    assert list(r.importances) == sorted(r.importances, reverse=True)
    assert r == rank_features(X, y, ["f0", "f1", "f2", "f3"], random_state=0, n_estimators=40)


# -- gradient boosting -------------------------------------------------------------------

def test_gb_staged_loss_non_increasing():
    X, y = blobs(150, k=4, seed=7, spread=2.0)
    gb = GradientBoostingClassifier(n_estimators=30, max_depth=3).fit(X, y)
    assert np.all(np.diff(gb.train_loss_) <= 1e-9)


def test_gb_separable_two_class():
    X = np.r_[np.zeros((20, 1)), np.ones((20, 1))] + np.linspace(0, 0.1, 40)[:, None]
    y = np.r_[np.zeros(20), np.ones(20)]
    assert GradientBoostingClassifier(n_estimators=50).fit(X, y).score(X, y) == 1.0


def test_gb_tiny_learning_rate_predicts_prior():
    X, y = blobs(90, k=3, seed=1)
    gb = GradientBoostingClassifier(learning_rate=1e-12, n_estimators=1).fit(X, y)
    majority = np.bincount(y).argmax()
    assert np.all(gb.predict(X) == majority)


def test_gb_single_class():
    gb = GradientBoostingClassifier(n_estimators=5).fit([[0], [1], [2]], ["x", "x", "x"])
    assert gb.estimators_ == []
    assert list(gb.predict([[7]])) == ["x"]


def test_gb_staged_matches_final():
    X, y = blobs(80, seed=3)
    gb = GradientBoostingClassifier(n_estimators=5, max_depth=2).fit(X, y)
    *_, last = gb.staged_decision_function(X)
    np.testing.assert_array_equal(last, gb.decision_function(X))


def test_gb_parameter_validation():
    with pytest.raises(ValueError):
        GradientBoostingClassifier(learning_rate=0).fit([[0], [1]], [0, 1])
    with pytest.raises(ValueError):
        GradientBoostingClassifier(n_estimators=0).fit([[0], [1]], [0, 1])


# -- estimator API ------------------------------------------------------------------------

@pytest.mark.parametrize("cls", [DecisionTreeClassifier, RandomForestClassifier,
                                 GradientBoostingClassifier])
def test_clone_and_params(cls):
    est = cls(max_depth=4)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    X, y = blobs(40, seed=8)
    p = clone(est).set_params(random_state=1).fit(X, y).predict_proba(X)
    np.testing.assert_allclose(p.sum(axis=1), 1.0)


@pytest.mark.parametrize("cls", [DecisionTreeClassifier, RandomForestClassifier,
                                 GradientBoostingClassifier])
def test_serialization_roundtrip(cls):
    X, y = blobs(60, seed=6)
    kw = {"n_estimators": 5} if cls is not DecisionTreeClassifier else {}
    m = cls(random_state=0, **kw).fit(X, y.astype(str))
    back = loads(dumps(m))
    Q = np.random.default_rng(0).uniform(-6, 6, size=(200, 3))
    np.testing.assert_array_equal(back.predict(Q), m.predict(Q))
    np.testing.assert_array_equal(back.predict_proba(Q), m.predict_proba(Q))


def test_loads_rejects_unknown_version():
    m = DecisionTreeClassifier().fit([[0], [1]], [0, 1])
    doc = dumps(m).replace('"format_version":1', '"format_version":9')
    with pytest.raises(ValueError, match="format"):
        loads(doc)


# -- evaluation and model selection ----------------------------------------------------

def test_accuracy_and_report():
    y = ["a", "a", "b", "b", "c"]
    p = ["a", "b", "b", "b", "a"]
    assert accuracy(y, p) == 0.6
    rep = report_from_predictions(y, p, labels=["a", "b", "c"])
    assert [(r.actual, r.predicted_wrong, r.misclassified, r.total) for r in rep.rows] == [
        ("a", "b", 1, 2), ("b", None, 0, 2), ("c", "a", 1, 1)]
    assert rep.accuracy == (rep.total - rep.misclassified) / rep.total
    assert "accuracy = 0.6000" in rep.to_table()


def test_all_correct_report():
    rep = report_from_predictions([1, 2, 2], [1, 2, 2])
    assert rep.accuracy == 1.0 and rep.misclassified == 0


def test_empty_test_set():
    with pytest.raises(ValueError):
        accuracy([], [])
    with pytest.raises(ValueError):
        EvalReport.from_rows([])


def test_evaluate_uses_model_classes():
    X, y = blobs(50, seed=2)
    dt = DecisionTreeClassifier().fit(X, y)
    rep = evaluate(dt, X, y)
    assert rep.accuracy == 1.0 and len(rep.rows) == 3


def test_from_rows_validates():
    with pytest.raises(ValueError):
        EvalReport.from_rows([EvalRow("a", "b", 3, 2)])


def test_stratified_split_proportions():
    y = np.array([0] * 50 + [1] * 23 + [2] * 7)
    tr, te = stratified_split(y, 0.2, 0)
    assert len(np.intersect1d(tr, te)) == 0 and len(tr) + len(te) == 80
    for c, n in [(0, 50), (1, 23), (2, 7)]:
        assert abs(np.sum(y[te] == c) - 0.2 * n) <= 1


def test_grid_search():
    X, y = blobs(120, seed=3, spread=2.5)
    one = grid_search(DecisionTreeClassifier(), {"max_depth": [2]}, X, y, random_state=0)
    assert one.best_params == {"max_depth": 2} and len(one.table) == 1
    res = grid_search(RandomForestClassifier(random_state=0), {"n_estimators": [1, 50]},
                      X, y, random_state=0)
    assert len(res.table) == 2
    again = grid_search(RandomForestClassifier(random_state=0), {"n_estimators": [1, 50]},
                        X, y, random_state=0)
    assert again.best_params == res.best_params
    with pytest.raises(ValueError):
        grid_search(DecisionTreeClassifier(), {}, X, y)
