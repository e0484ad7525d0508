"""From-scratch CART, random forest and gradient boosting classifiers."""
from ._tree import Split, Tree, best_split, gini
from .metrics import (EvalReport, EvalRow, accuracy, evaluate,
                      report_from_predictions)
from .models import (DecisionTreeClassifier, GradientBoostingClassifier,
                     RandomForestClassifier)
from .selection import (FeatureRanking, GridSearchResult, grid_search,
                        rank_features, stratified_split)
from .serialize import dumps, load_model, loads, save_model


def feature_importance(model):
    """Normalised impurity importance of a fitted tree or forest."""
    return model.feature_importances_


__all__ = [
    "Split", "Tree", "best_split", "gini", "EvalReport", "EvalRow",
    "accuracy", "evaluate", "report_from_predictions",
    "DecisionTreeClassifier", "GradientBoostingClassifier",
    "RandomForestClassifier", "FeatureRanking", "GridSearchResult",
    "grid_search", "rank_features", "stratified_split", "dumps", "load_model",
    "loads", "save_model", "feature_importance",
]
