"""Accuracy and misclassification reports in the per-class table layout."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class EvalRow:
    actual: str
    predicted_wrong: str | None    # most frequent wrong prediction, None if no misses
    misclassified: int
    total: int

    @property
    def correct(self) -> int:
        return self.total - self.misclassified


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    rows: tuple[EvalRow, ...]
    labels: tuple[str, ...] = ()
    confusion: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")

    @property
    def total(self) -> int:
        return sum(r.total for r in self.rows)

    @property
    def misclassified(self) -> int:
        return sum(r.misclassified for r in self.rows)

    @classmethod
    def from_rows(cls, rows: Sequence[EvalRow]) -> "EvalReport":
        """Aggregate per-class rows: accuracy = correct / total."""
        rows = tuple(rows)
        total = sum(r.total for r in rows)
        if total == 0:
            raise ValueError("cannot evaluate an empty test set")
        for r in rows:
            if not 0 <= r.misclassified <= r.total:
                raise ValueError(f"row {r.actual!r}: misclassified exceeds total")
        correct = sum(r.correct for r in rows)
        return cls(correct / total, rows, tuple(r.actual for r in rows))

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "total": self.total,
            "misclassified": self.misclassified,
            "rows": [asdict(r) for r in self.rows],
            "labels": list(self.labels),
            "confusion": [list(r) for r in self.confusion],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_table(self) -> str:
        """Plain-text table: actual class (count), predicted type, misses."""
        head = ("Actual fault type", "Predicted fault type", "# misclassified")
        body = [(f"{r.actual} ({r.total})", r.predicted_wrong or "-",
                 str(r.misclassified)) for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        fmt = " | ".join(f"{{:<{w}}}" for w in widths)
        lines = [fmt.format(*head), "-+-".join("-" * w for w in widths)]
        lines += [fmt.format(*row) for row in body]
        lines.append(f"accuracy = {self.accuracy:.4f}")
        return "\n".join(lines)


def accuracy(y_true, y_pred) -> float:
    """Correctly predicted instances over total predicted instances."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValueError("cannot evaluate an empty test set")
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred differ in shape")
    return float(np.mean(y_true == y_pred))


def report_from_predictions(y_true, y_pred, labels=None) -> EvalReport:
    """Build the per-class report from true and predicted labels.

    ``labels`` fixes the row order (default: sorted union of both label
    sets).  The predominant wrong prediction breaks ties toward the label
    that comes first in that order.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValueError("cannot evaluate an empty test set")
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred differ in shape")
    if labels is None:
        labels = np.unique(np.concatenate([y_true, y_pred]))
    labels = [str(l) for l in labels]
    index = {l: i for i, l in enumerate(labels)}
    yt = [str(v) for v in y_true]
    yp = [str(v) for v in y_pred]
    confusion = np.zeros((len(labels), len(labels)), dtype=int)
    for t, p in zip(yt, yp):
        confusion[index[t], index[p]] += 1
    rows = []
    for i, lab in enumerate(labels):
        total = int(confusion[i].sum())
        if total == 0:
            continue
        wrong = confusion[i].copy()
        wrong[i] = 0
        missed = int(wrong.sum())
        top = labels[int(np.argmax(wrong))] if missed else None
        rows.append(EvalRow(lab, top, missed, total))
    n = int(confusion.sum())
    acc = (n - sum(r.misclassified for r in rows)) / n
    return EvalReport(acc, tuple(rows), tuple(labels),
                      tuple(tuple(int(v) for v in r) for r in confusion))


def evaluate(model, X, y, labels=None) -> EvalReport:
    """Score a fitted classifier on labelled test data."""
    X = np.asarray(X)
    if X.shape[0] == 0:
        raise ValueError("cannot evaluate an empty test set")
    if labels is None and hasattr(model, "classes_"):
        labels = list(model.classes_)
        extra = sorted(set(map(str, np.unique(y))) - set(map(str, labels)))
        labels = [str(l) for l in labels] + extra
    return report_from_predictions(y, model.predict(X), labels)

