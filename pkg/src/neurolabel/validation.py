"""Input validation helpers for the estimator and metric entry points."""

from __future__ import annotations

from typing import Iterable, Sequence

from .corpus import Corpus, Report


def as_report(item, index: int = 0) -> Report:
    """Coerce a raw input row into a Report.

    Accepts Report objects, corpus-record dicts, or bare report strings.
    """
    if isinstance(item, Report):
        return item
    if isinstance(item, dict):
        if "report_text" not in item:
            raise ValueError(f"row {index}: dict input needs a 'report_text' key")
        return Report(
            report_id=str(item.get("report_id", f"row{index}")),
            report_text=str(item["report_text"]),
            clinical_information=str(item.get("clinical_information", "") or ""),
            meta=dict(item.get("meta", {}) or {}),
        )
    if isinstance(item, str):
        return Report(report_id=f"row{index}", report_text=item)
    raise ValueError(f"row {index}: cannot interpret {type(item).__name__} as a report")


def check_reports(X) -> list[Report]:
    """Validate and coerce an input collection into a list of Reports."""
    if X is None:
        raise ValueError("X must be a corpus or an iterable of reports, got None")
    if isinstance(X, Corpus):
        return list(X.reports)
    if isinstance(X, (str, bytes)):
        raise ValueError("X must be an iterable of reports, not a single string")
    if not isinstance(X, Iterable):
        raise ValueError(f"X must be iterable, got {type(X).__name__}")
    reports = [as_report(item, i) for i, item in enumerate(X)]
    return reports


def check_binary_labels(labels: dict[str, int], name: str = "labels") -> dict[str, int]:
    for rid, value in labels.items():
        if value not in (0, 1):
            raise ValueError(f"{name}[{rid!r}] must be 0 or 1, got {value!r}")
    return labels


def check_ratings_table(rows: Sequence[Sequence[object]]) -> list[list[object]]:
    if not rows:
        raise ValueError("rating table is empty")
    width = len(rows[0])
    if width < 2:
        raise ValueError("rating table needs at least 2 raters per item")
    table = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"rating table is ragged at item {i}")
        table.append(list(row))
    return table
