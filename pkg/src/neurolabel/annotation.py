"""Multi-annotator labelling workflow.

The event log is the single source of truth: an append-only JSONL file of
annotation events and consensus resolutions. Every derived structure (open
adjudication tasks, final labels, agreement rates) is recomputed from the
log, so replaying a log always reproduces the same state and concurrent
writers cannot corrupt finals.

Two protocols are supported:

* coarse   - two independent annotators decide normal vs abnormal; a third
             annotator breaks ties by majority.
* granular - three independent annotators assign every category; any
             category-level disagreement goes to a group consensus decision.

Reports whose first-round events include a skip or bad-scan are excluded
from adjudication denominators and surface in the review queue instead.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus
from .labels import (
    STATUS_BAD_SCAN,
    STATUS_CONSENSUS,
    STATUS_LABELLED,
    STATUS_SKIPPED,
    LabelSet,
)
from .taxonomy import CATEGORIES

KIND_COARSE = "coarse"
KIND_GRANULAR = "granular"
TASK_KINDS = (KIND_COARSE, KIND_GRANULAR)

ROLES = ("neuroradiologist", "radiology_trainee", "neurologist", "rules_engine")

PROVENANCE_UNANIMOUS = "unanimous"
PROVENANCE_TIEBREAK = "majority_with_tiebreak"
PROVENANCE_MEETING = "consensus_meeting"


class WorkflowError(ValueError):
    pass


@dataclass(frozen=True)
class AnnotationEvent:
    event_id: str
    report_id: str
    annotator_id: str
    role: str
    task_kind: str
    payload: LabelSet
    timestamp: str = ""
    supersedes: str | None = None

    def to_record(self) -> dict:
        record = {
            "type": "annotation",
            "event_id": self.event_id,
            "report_id": self.report_id,
            "annotator_id": self.annotator_id,
            "role": self.role,
            "task_kind": self.task_kind,
            "payload": self.payload.to_record(self.report_id, self.annotator_id),
            "timestamp": self.timestamp,
        }
        if self.supersedes:
            record["supersedes"] = self.supersedes
        return record


@dataclass(frozen=True)
class Resolution:
    event_id: str
    report_id: str
    task_kind: str
    payload: LabelSet
    resolvers: tuple[str, ...]
    timestamp: str = ""

    def to_record(self) -> dict:
        return {
            "type": "resolution",
            "event_id": self.event_id,
            "report_id": self.report_id,
            "task_kind": self.task_kind,
            "payload": self.payload.to_record(self.report_id, "consensus"),
            "resolvers": list(self.resolvers),
            "timestamp": self.timestamp,
        }


@dataclass
class AdjudicationTask:
    task_id: str
    report_id: str
    task_kind: str
    contributing_event_ids: list[str]
    disagreeing_categories: list[str]
    binary_conflict: bool = False
    state: str = "open"
    resolution: Resolution | None = None

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "report_id": self.report_id,
            "task_kind": self.task_kind,
            "contributing_event_ids": self.contributing_event_ids,
            "disagreeing_categories": self.disagreeing_categories,
            "binary_conflict": self.binary_conflict,
            "state": self.state,
        }


@dataclass(frozen=True)
class FinalLabel:
    report_id: str
    task_kind: str
    labels: LabelSet
    provenance: str
    resolver_ids: tuple[str, ...] = ()

    def to_record(self) -> dict:
        record = self.labels.to_record(self.report_id, ",".join(self.resolver_ids))
        record["provenance"] = self.provenance
        return record


def _payload_from_record(record: dict) -> LabelSet:
    return LabelSet.from_record(record)


def parse_log_record(record: dict):
    kind = record.get("type")
    if kind == "annotation":
        return AnnotationEvent(
            event_id=record["event_id"],
            report_id=record["report_id"],
            annotator_id=record["annotator_id"],
            role=record.get("role", "neuroradiologist"),
            task_kind=record["task_kind"],
            payload=_payload_from_record(record["payload"]),
            timestamp=record.get("timestamp", ""),
            supersedes=record.get("supersedes"),
        )
    if kind == "resolution":
        return Resolution(
            event_id=record["event_id"],
            report_id=record["report_id"],
            task_kind=record["task_kind"],
            payload=_payload_from_record(record["payload"]),
            resolvers=tuple(record.get("resolvers", ())),
            timestamp=record.get("timestamp", ""),
        )
    raise WorkflowError(f"unknown log record type {kind!r}")


class EventLog:
    """Append-only JSONL log; the single serialization point for writers."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self.records: list = []
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self.records.append(parse_log_record(json.loads(line)))

    def append(self, record) -> None:
        with self._lock:
            self.records.append(record)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.to_record(), ensure_ascii=False) + "\n")
                    fh.flush()

    def events(self) -> list[AnnotationEvent]:
        return [r for r in self.records if isinstance(r, AnnotationEvent)]

    def resolutions(self) -> list[Resolution]:
        return [r for r in self.records if isinstance(r, Resolution)]


def effective_events(events: list[AnnotationEvent]) -> list[AnnotationEvent]:
    """Latest event per (report, annotator, kind); superseded ones drop out."""
    latest: dict[tuple, tuple[int, AnnotationEvent]] = {}
    for i, event in enumerate(events):
        latest[(event.report_id, event.annotator_id, event.task_kind)] = (i, event)
    return [e for _, e in sorted(latest.values(), key=lambda pair: pair[0])]


@dataclass
class AdjudicationState:
    finals: dict[str, FinalLabel] = field(default_factory=dict)
    open_tasks: dict[str, AdjudicationTask] = field(default_factory=dict)
    review_queue: list[str] = field(default_factory=list)


def _granular_disagreements(payloads: list[LabelSet]) -> list[str]:
    out = []
    for cat in CATEGORIES:
        if len({p.categories[cat] for p in payloads}) > 1:
            out.append(cat)
    return out


def adjudicate_coarse(events: list[AnnotationEvent]) -> FinalLabel | AdjudicationTask:
    """Two-annotator binary protocol with a third-annotator tiebreak."""
    labelled = [e for e in events if e.payload.status == STATUS_LABELLED]
    by_annotator: dict[str, AnnotationEvent] = {}
    for e in labelled:
        by_annotator.setdefault(e.annotator_id, e)
    ordered = list(by_annotator.values())
    if len(ordered) < 2:
        raise WorkflowError("coarse adjudication needs two labelled events from distinct annotators")
    first, second = ordered[0], ordered[1]
    report_id = first.report_id
    if first.payload.binary_abnormal == second.payload.binary_abnormal:
        return FinalLabel(
            report_id=report_id,
            task_kind=KIND_COARSE,
            labels=first.payload,
            provenance=PROVENANCE_UNANIMOUS,
            resolver_ids=(first.annotator_id, second.annotator_id),
        )
    if len(ordered) >= 3:
        third = ordered[2]
        winner = first if third.payload.binary_abnormal == first.payload.binary_abnormal else second
        return FinalLabel(
            report_id=report_id,
            task_kind=KIND_COARSE,
            labels=winner.payload,
            provenance=PROVENANCE_TIEBREAK,
            resolver_ids=(first.annotator_id, second.annotator_id, third.annotator_id),
        )
    return AdjudicationTask(
        task_id=f"{report_id}:{KIND_COARSE}",
        report_id=report_id,
        task_kind=KIND_COARSE,
        contributing_event_ids=[first.event_id, second.event_id],
        disagreeing_categories=[],
        binary_conflict=True,
    )


def adjudicate_granular(events: list[AnnotationEvent]) -> FinalLabel | AdjudicationTask:
    """Three-annotator per-category protocol; disagreement goes to the group."""
    labelled = [e for e in events if e.payload.status == STATUS_LABELLED]
    by_annotator: dict[str, AnnotationEvent] = {}
    for e in labelled:
        by_annotator.setdefault(e.annotator_id, e)
    ordered = list(by_annotator.values())
    if len(ordered) < 3:
        raise WorkflowError("granular adjudication needs three labelled events from distinct annotators")
    trio = ordered[:3]
    report_id = trio[0].report_id
    disagreeing = _granular_disagreements([e.payload for e in trio])
    if not disagreeing:
        return FinalLabel(
            report_id=report_id,
            task_kind=KIND_GRANULAR,
            labels=trio[0].payload,
            provenance=PROVENANCE_UNANIMOUS,
            resolver_ids=tuple(e.annotator_id for e in trio),
        )
    return AdjudicationTask(
        task_id=f"{report_id}:{KIND_GRANULAR}",
        report_id=report_id,
        task_kind=KIND_GRANULAR,
        contributing_event_ids=[e.event_id for e in trio],
        disagreeing_categories=disagreeing,
    )


class AnnotationWorkflow:
    """Queue serving, event capture and adjudication over one corpus."""

    def __init__(self, corpus: Corpus, log: EventLog | None = None):
        self.corpus = corpus
        self.log = log or EventLog()
        self.annotators: dict[str, str] = {}
        for event in self.log.events():
            self.annotators.setdefault(event.annotator_id, event.role)

    # -- annotator lifecycle -------------------------------------------------

    def register_annotator(self, annotator_id: str, role: str = "neuroradiologist") -> None:
        if not annotator_id:
            raise WorkflowError("annotator_id must be non-empty")
        if role not in ROLES:
            raise WorkflowError(f"unknown role {role!r}; expected one of {ROLES}")
        self.annotators[annotator_id] = role

    def _require_annotator(self, annotator_id: str) -> str:
        if annotator_id not in self.annotators:
            raise WorkflowError(f"unknown annotator {annotator_id!r}; register first")
        return self.annotators[annotator_id]

    # -- queue ----------------------------------------------------------------

    def next_report(self, annotator_id: str, task_kind: str, review_skipped: bool = False):
        """The next report this annotator has not yet handled, in stable
        corpus order; None when exhausted. Skipped reports are only re-served
        in a review pass."""
        self._require_annotator(annotator_id)
        _check_kind(task_kind)
        seen: dict[str, str] = {}
        for event in effective_events(self.log.events()):
            if event.annotator_id == annotator_id and event.task_kind == task_kind:
                seen[event.report_id] = event.payload.status
        for report in self.corpus:
            status = seen.get(report.report_id)
            if status is None:
                return report
            if review_skipped and status == STATUS_SKIPPED:
                return report
        return None

    # -- submission ------------------------------------------------------------

    def submit(self, annotator_id: str, report_id: str, task_kind: str, payload: LabelSet) -> AnnotationEvent:
        role = self._require_annotator(annotator_id)
        _check_kind(task_kind)
        if report_id not in self.corpus:
            raise WorkflowError(f"unknown report {report_id!r}")
        payload.validate()
        supersedes = None
        for event in self.log.events():
            if (
                event.report_id == report_id
                and event.annotator_id == annotator_id
                and event.task_kind == task_kind
            ):
                supersedes = event.event_id
        event = AnnotationEvent(
            event_id=uuid.uuid4().hex,
            report_id=report_id,
            annotator_id=annotator_id,
            role=role,
            task_kind=task_kind,
            payload=payload,
            timestamp=_now(),
            supersedes=supersedes,
        )
        self.log.append(event)
        return event

    def resolve(
        self,
        report_id: str,
        task_kind: str,
        payload: LabelSet,
        resolvers: list[str],
    ) -> Resolution:
        _check_kind(task_kind)
        task_id = f"{report_id}:{task_kind}"
        state = self.adjudication(task_kind)
        if task_id not in state.open_tasks:
            raise WorkflowError(f"no open adjudication task {task_id!r}")
        payload.validate()
        resolution = Resolution(
            event_id=uuid.uuid4().hex,
            report_id=report_id,
            task_kind=task_kind,
            payload=payload,
            resolvers=tuple(resolvers),
            timestamp=_now(),
        )
        self.log.append(resolution)
        return resolution

    # -- derived state ----------------------------------------------------------

    def adjudication(self, task_kind: str) -> AdjudicationState:
        """Recompute finals, open tasks and the review queue from the log."""
        _check_kind(task_kind)
        state = AdjudicationState()
        events = [e for e in effective_events(self.log.events()) if e.task_kind == task_kind]
        resolutions = {
            r.report_id: r for r in self.log.resolutions() if r.task_kind == task_kind
        }
        by_report: dict[str, list[AnnotationEvent]] = {}
        for event in events:
            by_report.setdefault(event.report_id, []).append(event)
        required = 2 if task_kind == KIND_COARSE else 3

        for report_id, report_events in by_report.items():
            statuses = [e.payload.status for e in report_events]
            if any(s == STATUS_SKIPPED for s in statuses):
                state.review_queue.append(report_id)
            if any(s == STATUS_CONSENSUS for s in statuses):
                resolution = resolutions.get(report_id)
                if resolution is not None:
                    state.finals[report_id] = FinalLabel(
                        report_id=report_id,
                        task_kind=task_kind,
                        labels=resolution.payload,
                        provenance=PROVENANCE_MEETING,
                        resolver_ids=resolution.resolvers,
                    )
                else:
                    flagged = [e for e in report_events if e.payload.status == STATUS_CONSENSUS]
                    state.open_tasks[f"{report_id}:{task_kind}"] = AdjudicationTask(
                        task_id=f"{report_id}:{task_kind}",
                        report_id=report_id,
                        task_kind=task_kind,
                        contributing_event_ids=[e.event_id for e in flagged],
                        disagreeing_categories=[],
                    )
                continue
            labelled = [e for e in report_events if e.payload.status == STATUS_LABELLED]
            if len({e.annotator_id for e in labelled}) < required:
                continue
            adjudicate = adjudicate_coarse if task_kind == KIND_COARSE else adjudicate_granular
            outcome = adjudicate(report_events)
            if isinstance(outcome, FinalLabel):
                state.finals[report_id] = outcome
                continue
            resolution = resolutions.get(report_id)
            if resolution is not None:
                state.finals[report_id] = FinalLabel(
                    report_id=report_id,
                    task_kind=task_kind,
                    labels=resolution.payload,
                    provenance=PROVENANCE_MEETING,
                    resolver_ids=resolution.resolvers,
                )
            else:
                state.open_tasks[outcome.task_id] = outcome
        return state

    def finals(self, task_kind: str) -> dict[str, FinalLabel]:
        return self.adjudication(task_kind).finals

    def open_tasks(self, task_kind: str | None = None) -> list[AdjudicationTask]:
        kinds = TASK_KINDS if task_kind is None else (task_kind,)
        out: list[AdjudicationTask] = []
        for kind in kinds:
            out.extend(self.adjudication(kind).open_tasks.values())
        return sorted(out, key=lambda t: t.task_id)

    def agreement_rate(self, task_kind: str) -> float:
        return agreement_rate(self.log.events(), task_kind)

    def export_finals(self, task_kind: str, path: str | Path) -> int:
        finals = self.finals(task_kind)
        written = 0
        with Path(path).open("w", encoding="utf-8") as fh:
            for report in self.corpus:
                final = finals.get(report.report_id)
                if final is None:
                    continue
                fh.write(json.dumps(final.to_record(), ensure_ascii=False) + "\n")
                written += 1
        return written


def agreement_rate(events: list[AnnotationEvent], task_kind: str) -> float:
    """First-round agreement percentage, to one decimal place.

    Coarse: fraction of reports whose first two labelled events agree on the
    binary flag. Granular: fraction with unanimous agreement across every
    category. Reports with skip, consensus or bad-scan first-round events are
    excluded from the denominator.
    """
    _check_kind(task_kind)
    relevant = [e for e in effective_events(events) if e.task_kind == task_kind]
    by_report: dict[str, list[AnnotationEvent]] = {}
    for event in relevant:
        by_report.setdefault(event.report_id, []).append(event)
    required = 2 if task_kind == KIND_COARSE else 3
    total = 0
    agreed = 0
    for report_events in by_report.values():
        if any(
            e.payload.status in (STATUS_SKIPPED, STATUS_BAD_SCAN, STATUS_CONSENSUS)
            for e in report_events
        ):
            continue
        labelled = [e for e in report_events if e.payload.status == STATUS_LABELLED]
        by_annotator: dict[str, AnnotationEvent] = {}
        for e in labelled:
            by_annotator.setdefault(e.annotator_id, e)
        ordered = list(by_annotator.values())
        if len(ordered) < required:
            raise WorkflowError(
                f"first round incomplete for report {report_events[0].report_id!r}"
            )
        round_one = ordered[:required]
        total += 1
        if task_kind == KIND_COARSE:
            if len({e.payload.binary_abnormal for e in round_one}) == 1:
                agreed += 1
        else:
            if not _granular_disagreements([e.payload for e in round_one]):
                agreed += 1
    if total == 0:
        raise WorkflowError("no completed first-round reports")
    return round(100.0 * agreed / total, 1)


def _check_kind(task_kind: str) -> None:
    if task_kind not in TASK_KINDS:
        raise WorkflowError(f"unknown task kind {task_kind!r}; expected one of {TASK_KINDS}")


def _now() -> str:
    import datetime

    return datetime.datetime.now(datetime.timezone.utc).isoformat()
