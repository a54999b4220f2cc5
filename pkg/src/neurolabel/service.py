"""HTTP API over the corpus, rule engine, annotation workflow and metrics.

State above the event log is never mutated in place: every write appends to
the log and derived views are recomputed, so killing and restarting the
service (or replaying the log elsewhere) reproduces identical responses.
Payload shapes are exactly the JSONL record shapes used on disk, wrapped in
single objects.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel, Field

from . import __version__
from .annotation import TASK_KINDS, AnnotationWorkflow, EventLog, WorkflowError
from .corpus import CorpusError, ingest_corpus, load_labels
from .engine import RuleEngine, segment_report
from .labeler import ReportLabeler
from .labels import LabelSet
from .metrics import MetricsError, build_metric_report
from .taxonomy import CATEGORIES, CORE_CATEGORIES, list_categories
from .validation import as_report

ENV_PREFIX = "NEUROLABEL_"


@dataclass
class ServiceConfig:
    corpus_path: str
    ruleset_path: str | None = None
    event_log_path: str | None = None
    port: int = 8000
    host: str = "127.0.0.1"

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        if not path.exists():
            raise CorpusError(f"config file not found: {path}")
        with path.open(encoding="utf-8") as fh:
            raw = json.load(fh)
        config = cls(
            corpus_path=raw.get("corpus", ""),
            ruleset_path=raw.get("ruleset"),
            event_log_path=raw.get("event_log"),
            port=int(raw.get("port", 8000)),
            host=raw.get("host", "127.0.0.1"),
        )
        return config.with_env_overrides()

    def with_env_overrides(self) -> "ServiceConfig":
        self.corpus_path = os.environ.get(ENV_PREFIX + "CORPUS", self.corpus_path)
        ruleset = os.environ.get(ENV_PREFIX + "RULESET")
        if ruleset:
            self.ruleset_path = ruleset
        event_log = os.environ.get(ENV_PREFIX + "EVENT_LOG")
        if event_log:
            self.event_log_path = event_log
        port = os.environ.get(ENV_PREFIX + "PORT")
        if port:
            self.port = int(port)
        return self


class AnnotationBody(BaseModel):
    report_id: str
    annotator_id: str
    task_kind: str
    role: str = "neuroradiologist"
    payload: dict


class ResolutionBody(BaseModel):
    payload: dict
    resolvers: list[str] = Field(default_factory=list)


class ReportBody(BaseModel):
    report_id: str = "adhoc"
    report_text: str
    clinical_information: str = ""


def _labelset_record(report_id: str, labels: LabelSet, source: str) -> dict:
    record = labels.to_record(report_id, source)
    record["confidences"] = {k: labels.confidences[k] for k in sorted(labels.confidences)}
    record["evidence"] = [m.to_record() for m in labels.evidence]
    return record


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the application: load corpus and ruleset, replay the event log."""
    if not config.corpus_path:
        raise CorpusError("config must name a corpus file")
    corpus = ingest_corpus(config.corpus_path).corpus
    labeler = ReportLabeler(ruleset=config.ruleset_path).fit()
    engine: RuleEngine = labeler.engine_
    log = EventLog(config.event_log_path)
    workflow = AnnotationWorkflow(corpus, log)

    app = FastAPI(title="neurolabel", version=__version__)
    app.state.workflow = workflow
    app.state.engine = engine

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__, "reports": len(corpus)}

    @app.get("/categories")
    def categories():
        return [
            {
                "category": info.category,
                "description": info.description,
                "codebook_ref": info.codebook_ref,
                "core": info.core,
            }
            for info in list_categories(labeler.ruleset_)
        ]

    @app.get("/ruleset")
    def ruleset():
        return {
            "header": labeler.ruleset_.header_record(),
            "rules": [rule.to_record() for rule in labeler.ruleset_.rules],
        }

    @app.get("/reports/next")
    def next_report(
        annotator: str = Query(...),
        kind: str = Query(...),
        role: str = Query("neuroradiologist"),
        review: bool = Query(False),
    ):
        try:
            if annotator not in workflow.annotators:
                workflow.register_annotator(annotator, role)
            report = workflow.next_report(annotator, kind, review_skipped=review)
        except WorkflowError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if report is None:
            return Response(status_code=204)
        return report.to_record()

    @app.post("/annotations")
    def submit_annotation(body: AnnotationBody):
        try:
            if body.annotator_id not in workflow.annotators:
                workflow.register_annotator(body.annotator_id, body.role)
            payload = LabelSet.from_record(body.payload)
            event = workflow.submit(body.annotator_id, body.report_id, body.task_kind, payload)
        except (WorkflowError, ValueError) as exc:
            status = 404 if "unknown report" in str(exc) else 422
            raise HTTPException(status_code=status, detail=str(exc)) from exc
        return {"event_id": event.event_id, "supersedes": event.supersedes}

    @app.get("/consensus")
    def consensus_queue():
        return [task.to_record() for task in workflow.open_tasks()]

    @app.post("/consensus/{task_id}")
    def resolve_consensus(task_id: str, body: ResolutionBody):
        if ":" not in task_id:
            raise HTTPException(status_code=422, detail="task_id is <report_id>:<kind>")
        report_id, kind = task_id.rsplit(":", 1)
        try:
            payload = LabelSet.from_record(body.payload)
            resolution = workflow.resolve(report_id, kind, payload, body.resolvers)
        except WorkflowError as exc:
            status = 404 if "no open adjudication task" in str(exc) else 422
            raise HTTPException(status_code=status, detail=str(exc)) from exc
        return {"event_id": resolution.event_id, "task_id": task_id}

    @app.get("/finals")
    def finals(kind: str = Query("granular")):
        if kind not in TASK_KINDS:
            raise HTTPException(status_code=422, detail=f"unknown kind {kind!r}")
        return [final.to_record() for final in workflow.finals(kind).values()]

    @app.post("/label")
    def label(body: ReportBody):
        report = as_report(body.model_dump())
        labels = engine.label(report)
        record = _labelset_record(report.report_id, labels, "rules")
        record["sentences"] = [
            {"index": s.index, "text": s.text, "source": s.source}
            for s in segment_report(report, engine.config.use_clinical_information)
        ]
        return record

    @app.get("/metrics/agreement")
    def agreement(kind: str = Query(...)):
        try:
            rate = workflow.agreement_rate(kind)
        except WorkflowError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"task_kind": kind, "agreement_percent": rate}

    def _label_source(name: str, kind: str) -> dict[str, dict[str, int]]:
        if name == "finals":
            finals = workflow.finals(kind)
            return {rid: dict(final.labels.categories) for rid, final in finals.items()}
        if name == "rules":
            return {
                report.report_id: dict(engine.label(report).categories) for report in corpus
            }
        path = Path(name)
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"label source not found: {name}")
        return {rid: dict(rec.labels.categories) for rid, rec in load_labels(path).items()}

    @app.get("/metrics/validation")
    def validation(
        pred: str = Query(...),
        ref: str = Query(...),
        kind: str = Query("granular"),
    ):
        predicted = _label_source(pred, kind)
        reference = _label_source(ref, kind)
        shared = sorted(set(predicted) & set(reference))
        if not shared:
            raise HTTPException(status_code=422, detail="no shared report ids between sources")
        predicted = {rid: predicted[rid] for rid in shared}
        reference = {rid: reference[rid] for rid in shared}
        try:
            report = build_metric_report(predicted, reference, list(CORE_CATEGORIES))
        except MetricsError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        rows = []
        for name, metrics in report.rows():
            rows.append({"category": name, **metrics.as_dict()})
        return {"n_reports": len(shared), "rows": rows}

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
