"""Corpus ingestion, persistence and partitioning.

Corpus JSONL: UTF-8, one object per line with required ``report_id`` and
``report_text`` strings plus optional ``clinical_information`` and ``meta``
(string-to-string map). Label JSONL: ``report_id``, ``binary_abnormal``,
``categories``, ``status``, ``source``.

Corpora are immutable after ingest and safe for concurrent reads.
"""

from __future__ import annotations

import datetime as _dt
import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .labels import LabelSet

_INLINE_WS = re.compile(r"[ \t\f\v]+")


class CorpusError(ValueError):
    pass


def normalize_text(text: str) -> str:
    """Unify line endings to LF and collapse whitespace runs inside lines."""
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = [_INLINE_WS.sub(" ", line).strip() for line in text.split("\n")]
    return "\n".join(lines).strip()


@dataclass(frozen=True)
class Report:
    """One de-identified examination record."""

    report_id: str
    report_text: str
    clinical_information: str = ""
    meta: dict[str, str] = field(default_factory=dict)

    def to_record(self) -> dict:
        record = {
            "report_id": self.report_id,
            "clinical_information": self.clinical_information,
            "report_text": self.report_text,
        }
        if self.meta:
            record["meta"] = dict(self.meta)
        return record


@dataclass(frozen=True)
class Corpus:
    corpus_id: str
    reports: tuple[Report, ...]
    source_path: str = ""
    ingested_at: str = ""

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self):
        return iter(self.reports)

    def __getitem__(self, report_id: str) -> Report:
        report = self.get(report_id)
        if report is None:
            raise KeyError(report_id)
        return report

    def get(self, report_id: str) -> Report | None:
        return self._index().get(report_id)

    def __contains__(self, report_id: str) -> bool:
        return report_id in self._index()

    def _index(self) -> dict[str, Report]:
        index = getattr(self, "_cached_index", None)
        if index is None:
            index = {r.report_id: r for r in self.reports}
            object.__setattr__(self, "_cached_index", index)
        return index

    def report_ids(self) -> list[str]:
        return [r.report_id for r in self.reports]


@dataclass
class IngestResult:
    corpus: Corpus
    rejections: list[tuple[int, str]]

    @property
    def report_count(self) -> int:
        return len(self.corpus)

    @property
    def rejection_count(self) -> int:
        return len(self.rejections)


def _parse_report(record: dict) -> Report:
    if not isinstance(record, dict):
        raise CorpusError("record is not an object")
    report_id = record.get("report_id")
    if not isinstance(report_id, str) or not report_id.strip():
        raise CorpusError("missing or empty field 'report_id'")
    raw_text = record.get("report_text")
    if not isinstance(raw_text, str):
        raise CorpusError("missing field 'report_text'")
    report_text = normalize_text(raw_text)
    if not report_text:
        raise CorpusError("field 'report_text' is empty after normalization")
    clinical = record.get("clinical_information", "")
    if clinical is None:
        clinical = ""
    if not isinstance(clinical, str):
        raise CorpusError("field 'clinical_information' must be a string")
    meta = record.get("meta", {}) or {}
    if not isinstance(meta, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in meta.items()
    ):
        raise CorpusError("field 'meta' must be a string-to-string map")
    return Report(
        report_id=report_id.strip(),
        report_text=report_text,
        clinical_information=normalize_text(clinical),
        meta=dict(meta),
    )


def ingest_corpus(path: str | Path, corpus_id: str | None = None) -> IngestResult:
    """Read a corpus JSONL file.

    Every line becomes a report or a line-numbered rejection; nothing is
    silently dropped. The first occurrence of a duplicate report_id wins.
    """
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    reports: list[Report] = []
    rejections: list[tuple[int, str]] = []
    seen: set[str] = set()
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                rejections.append((lineno, f"not valid JSON: {exc.msg}"))
                continue
            try:
                report = _parse_report(record)
            except CorpusError as exc:
                rejections.append((lineno, str(exc)))
                continue
            if report.report_id in seen:
                rejections.append((lineno, f"duplicate report_id {report.report_id!r}"))
                continue
            seen.add(report.report_id)
            reports.append(report)
    corpus = Corpus(
        corpus_id=corpus_id or path.stem,
        reports=tuple(reports),
        source_path=str(path),
        ingested_at=_dt.datetime.now(_dt.timezone.utc).isoformat(),
    )
    return IngestResult(corpus=corpus, rejections=rejections)


def write_corpus(corpus: Corpus, path: str | Path) -> int:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for report in corpus:
            fh.write(json.dumps(report.to_record(), ensure_ascii=False) + "\n")
    return len(corpus)


def split_corpus(corpus: Corpus, fractions: list[float], seed: int) -> list[Corpus]:
    """Partition a corpus into disjoint, exhaustive parts.

    Part sizes follow the largest-remainder rule, so each differs from
    fraction*N by less than 1. Deterministic for a fixed seed; reports keep
    their original corpus order inside each part.
    """
    if len(corpus) == 0:
        raise CorpusError("cannot split an empty corpus")
    if not fractions:
        raise CorpusError("no fractions given")
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise CorpusError(f"fraction {f!r} outside (0, 1]")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise CorpusError(f"fractions sum to {sum(fractions)!r}, expected 1.0")

    n = len(corpus)
    order = list(range(n))
    random.Random(seed).shuffle(order)

    exact = [f * n for f in fractions]
    sizes = [int(x) for x in exact]
    shortfall = n - sum(sizes)
    by_remainder = sorted(range(len(fractions)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in by_remainder[:shortfall]:
        sizes[i] += 1

    parts: list[Corpus] = []
    cursor = 0
    for i, size in enumerate(sizes):
        picked = sorted(order[cursor : cursor + size])
        cursor += size
        parts.append(
            Corpus(
                corpus_id=f"{corpus.corpus_id}.part{i}",
                reports=tuple(corpus.reports[j] for j in picked),
                source_path=corpus.source_path,
                ingested_at=corpus.ingested_at,
            )
        )
    return parts


def export_labels(
    corpus: Corpus,
    labels: dict[str, LabelSet],
    path: str | Path,
    source: str = "rules",
) -> int:
    """Write one label record per labelled report, in corpus order."""
    unknown = [rid for rid in labels if rid not in corpus]
    if unknown:
        raise CorpusError(f"labels reference unknown report_ids: {sorted(unknown)}")
    path = Path(path)
    written = 0
    try:
        fh = path.open("w", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot write labels to {path}: {exc}") from exc
    with fh:
        for report in corpus:
            if report.report_id not in labels:
                continue
            record = labels[report.report_id].to_record(report.report_id, source)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            written += 1
    return written


@dataclass(frozen=True)
class LabelRecord:
    report_id: str
    labels: LabelSet
    source: str


def load_labels(path: str | Path) -> dict[str, LabelRecord]:
    """Read a label JSONL file into report_id -> LabelRecord."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"label file not found: {path}")
    out: dict[str, LabelRecord] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: not valid JSON: {exc.msg}") from exc
            rid = record.get("report_id")
            if not rid:
                raise CorpusError(f"{path}:{lineno}: missing report_id")
            out[rid] = LabelRecord(
                report_id=rid,
                labels=LabelSet.from_record(record),
                source=record.get("source", ""),
            )
    return out
