"""Agreement and validation metrics: confusion-matrix statistics with
macro-averaging, Fleiss' kappa, ROC curves and fixed-sensitivity operating
points.

All operations are pure functions over immutable inputs. Undefined metrics
(zero denominators) are reported as ``None``, never silently as 0 or 1, and a
macro-average over a list containing an undefined value is itself undefined.
Percentages are formatted to one decimal place for display; machine exports
keep full precision.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v < 0:
                raise MetricsError(f"count {f.name} must be non-negative, got {v}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Metrics:
    sensitivity: float | None = None
    specificity: float | None = None
    accuracy: float | None = None
    precision: float | None = None
    f1: float | None = None
    support: int = 0

    def as_dict(self) -> dict:
        return {
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "f1": self.f1,
            "support": self.support,
        }


def confusion(predicted: dict[str, int], reference: dict[str, int]) -> ConfusionMatrix:
    """Counts over identical id sets; positive class is 1."""
    if set(predicted) != set(reference):
        only_pred = sorted(set(predicted) - set(reference))[:5]
        only_ref = sorted(set(reference) - set(predicted))[:5]
        raise MetricsError(
            f"id sets differ: only in predicted {only_pred}, only in reference {only_ref}"
        )
    tp = fp = fn = tn = 0
    for rid, ref in reference.items():
        pred = predicted[rid]
        if ref == 1 and pred == 1:
            tp += 1
        elif ref == 0 and pred == 1:
            fp += 1
        elif ref == 1 and pred == 0:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def derive_metrics(cm: ConfusionMatrix) -> Metrics:
    if cm.total == 0:
        raise MetricsError("cannot derive metrics from an empty matrix")
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    return Metrics(
        sensitivity=tp / (tp + fn) if tp + fn > 0 else None,
        specificity=tn / (tn + fp) if tn + fp > 0 else None,
        accuracy=(tp + tn) / cm.total,
        precision=tp / (tp + fp) if tp + fp > 0 else None,
        f1=2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn > 0 else None,
        support=tp + fn,
    )


_MEAN_FIELDS = ("sensitivity", "specificity", "accuracy", "precision", "f1")


def macro_average(per_category: dict[str, Metrics], categories: Sequence[str]) -> Metrics:
    """Unweighted arithmetic mean over exactly the listed categories."""
    if not categories:
        raise MetricsError("macro_average needs at least one category")
    missing = [c for c in categories if c not in per_category]
    if missing:
        raise MetricsError(f"macro_average missing categories: {missing}")
    values: dict[str, float | None] = {}
    for name in _MEAN_FIELDS:
        column = [getattr(per_category[c], name) for c in categories]
        values[name] = None if any(v is None for v in column) else math.fsum(column) / len(column)
    support = sum(per_category[c].support for c in categories)
    return Metrics(support=support, **values)


def fleiss_kappa(ratings: Sequence[Sequence[object]]) -> float:
    """Fleiss' kappa over an items-by-raters table of category assignments.

    Works for any hashable category values and any fixed rater count n >= 2
    (the two-rater case is well defined). When chance agreement is 1 (every
    rater always picks the same single category) kappa is 1 by convention.
    """
    if not ratings:
        raise MetricsError("rating table is empty")
    n_raters = len(ratings[0])
    if n_raters < 2:
        raise MetricsError("fleiss_kappa needs at least 2 raters per item")
    for i, row in enumerate(ratings):
        if len(row) != n_raters:
            raise MetricsError(f"ragged rating table: item {i} has {len(row)} ratings")

    categories = sorted({str(v) for row in ratings for v in row})
    cat_index = {c: j for j, c in enumerate(categories)}
    n_items = len(ratings)

    counts = [[0] * len(categories) for _ in range(n_items)]
    for i, row in enumerate(ratings):
        for v in row:
            counts[i][cat_index[str(v)]] += 1

    p_bar = math.fsum(
        (math.fsum(c * c for c in row) - n_raters) / (n_raters * (n_raters - 1)) for row in counts
    ) / n_items
    totals = [math.fsum(counts[i][j] for i in range(n_items)) for j in range(len(categories))]
    assignments = n_items * n_raters
    p_e = math.fsum((t / assignments) ** 2 for t in totals)
    if abs(1.0 - p_e) < 1e-15:
        return 1.0
    return (p_bar - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class ScoredPrediction:
    report_id: str
    score: float
    label: int

    def __post_init__(self):
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise MetricsError(f"score for {self.report_id!r} outside [0,1]: {self.score!r}")
        if self.label not in (0, 1):
            raise MetricsError(f"reference label for {self.report_id!r} must be 0 or 1")


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class RocCurve:
    points: tuple[RocPoint, ...]
    auc: float


def roc(predictions: Iterable[ScoredPrediction]) -> RocCurve:
    """Threshold sweep over distinct scores, descending; ties share a step.

    The curve runs from (0,0) to (1,1) and is monotone non-decreasing in both
    axes; AUC is the trapezoidal integral.
    """
    preds = list(predictions)
    positives = sum(p.label for p in preds)
    negatives = len(preds) - positives
    if positives == 0 or negatives == 0:
        raise MetricsError("roc needs both classes in the reference labels")

    by_score: dict[float, list[int]] = {}
    for p in preds:
        by_score.setdefault(p.score, []).append(p.label)

    points = [RocPoint(threshold=math.inf, fpr=0.0, tpr=0.0)]
    tp = fp = 0
    for score in sorted(by_score, reverse=True):
        labels = by_score[score]
        tp += sum(labels)
        fp += len(labels) - sum(labels)
        points.append(RocPoint(threshold=score, fpr=fp / negatives, tpr=tp / positives))

    area = math.fsum(
        (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0 for a, b in zip(points, points[1:])
    )
    return RocCurve(points=tuple(points), auc=area)


@dataclass(frozen=True)
class OperatingPoint:
    threshold: float
    tpr: float
    fpr: float

    @property
    def specificity(self) -> float:
        return 1.0 - self.fpr


def operating_point(curve: RocCurve, min_sensitivity: float) -> OperatingPoint:
    """The threshold with tpr >= target that maximises specificity.

    Ties go to the higher threshold (the stricter classifier).
    """
    if not 0.0 < min_sensitivity <= 1.0:
        raise MetricsError(f"min_sensitivity must be in (0,1], got {min_sensitivity!r}")
    eligible = [p for p in curve.points if p.tpr >= min_sensitivity and math.isfinite(p.threshold)]
    if not eligible:
        raise MetricsError(f"no threshold reaches sensitivity {min_sensitivity}")
    best = max(eligible, key=lambda p: (1.0 - p.fpr, p.threshold))
    return OperatingPoint(threshold=best.threshold, tpr=best.tpr, fpr=best.fpr)


@dataclass(frozen=True)
class MetricReport:
    per_category: dict[str, Metrics]
    macro: Metrics | None
    macro_categories: tuple[str, ...]

    def rows(self) -> list[tuple[str, Metrics]]:
        out = list(self.per_category.items())
        if self.macro is not None:
            out.append(("Macro-average", self.macro))
        return out


def build_metric_report(
    predicted: dict[str, dict[str, int]],
    reference: dict[str, dict[str, int]],
    categories: Sequence[str],
) -> MetricReport:
    """Per-category confusion metrics plus the macro row.

    ``predicted`` and ``reference`` map report_id -> category -> {0,1}.
    """
    per_category: dict[str, Metrics] = {}
    for cat in categories:
        pred = {rid: v.get(cat, 0) for rid, v in predicted.items()}
        ref = {rid: v.get(cat, 0) for rid, v in reference.items()}
        per_category[cat] = derive_metrics(confusion(pred, ref))
    macro = macro_average(per_category, list(categories)) if len(categories) > 1 else None
    return MetricReport(
        per_category=per_category, macro=macro, macro_categories=tuple(categories)
    )


def percent(value: float | None) -> str:
    """Percentage formatted to one decimal place; '-' when undefined."""
    return "-" if value is None else f"{value * 100:.1f}"


def write_metrics_csv(report: MetricReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "sensitivity", "specificity", "accuracy", "precision", "f1", "support"])
        for name, m in report.rows():
            writer.writerow(
                [name, m.sensitivity, m.specificity, m.accuracy, m.precision, m.f1, m.support]
            )


def write_metrics_jsonl(report: MetricReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for name, m in report.rows():
            fh.write(json.dumps({"category": name, **m.as_dict()}, ensure_ascii=False) + "\n")
