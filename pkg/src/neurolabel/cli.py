"""Batch command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error, 3 golden-test mismatch.
Tabular output prints percentages to one decimal place; files written with
``--out`` keep full precision.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .annotation import EventLog, WorkflowError, agreement_rate
from .corpus import CorpusError, ingest_corpus, load_labels, write_corpus
from .labeler import ReportLabeler, label_corpus
from .labels import STATUS_BAD_SCAN, STATUS_SKIPPED
from .metrics import (
    MetricsError,
    ScoredPrediction,
    build_metric_report,
    operating_point,
    percent,
    roc as roc_curve,
    write_metrics_csv,
)
from .service import ServiceConfig, serve as run_service
from .taxonomy import (
    CORE_CATEGORIES,
    RulesetError,
    golden_corpus_path,
    golden_labels_path,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MISMATCH = 3


class GoldenMismatch(Exception):
    pass


@click.group()
def cli():
    """Labelling workbench for neuroradiology reports."""


@cli.command()
@click.argument("src", type=click.Path())
@click.argument("dst", type=click.Path())
def ingest(src, dst):
    """Validate and normalize a corpus JSONL file."""
    result = ingest_corpus(src)
    for lineno, reason in result.rejections:
        click.echo(f"rejected line {lineno}: {reason}", err=True)
    write_corpus(result.corpus, dst)
    click.echo(f"ingested {result.report_count} reports, rejected {result.rejection_count}")


@cli.command()
@click.argument("corpus_path", type=click.Path())
@click.option("--ruleset", "ruleset_path", type=click.Path(), default=None, help="Ruleset file (shipped default if omitted).")
@click.option("--out", "labels_path", type=click.Path(), required=True, help="Label JSONL output.")
@click.option("--evidence", "evidence_path", type=click.Path(), default=None, help="Evidence JSONL output.")
def label(corpus_path, ruleset_path, labels_path, evidence_path):
    """Run the rule engine over a corpus."""
    result = ingest_corpus(corpus_path)
    if result.rejections:
        for lineno, reason in result.rejections:
            click.echo(f"rejected line {lineno}: {reason}", err=True)
    labeler = ReportLabeler(ruleset=ruleset_path).fit()
    labels = label_corpus(result.corpus, labeler, labels_path, evidence_path)
    abnormal = sum(ls.binary_abnormal for ls in labels.values())
    click.echo(f"labelled {len(labels)} reports ({abnormal} abnormal)")


def _comparable(records, granular):
    out = {}
    for rid, rec in records.items():
        if rec.labels.status in (STATUS_SKIPPED, STATUS_BAD_SCAN):
            continue
        out[rid] = dict(rec.labels.categories) if granular else {
            "binary_abnormal": rec.labels.binary_abnormal
        }
    return out


@cli.command()
@click.option("--pred", "pred_path", type=click.Path(), required=True)
@click.option("--ref", "ref_path", type=click.Path(), required=True)
@click.option("--granular", is_flag=True, help="Per-category table instead of the binary row.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the table as CSV.")
def evaluate(pred_path, ref_path, granular, out_path):
    """Compare a predicted label file against a reference label file."""
    pred = _comparable(load_labels(pred_path), granular)
    ref = _comparable(load_labels(ref_path), granular)
    shared = sorted(set(pred) & set(ref))
    if not shared:
        raise CorpusError("no shared report ids between pred and ref")
    pred = {rid: pred[rid] for rid in shared}
    ref = {rid: ref[rid] for rid in shared}
    categories = list(CORE_CATEGORIES) if granular else ["binary_abnormal"]
    report = build_metric_report(pred, ref, categories)
    if granular:
        click.echo(f"{'Category':28s} {'Sensitivity':>12s} {'Specificity':>12s} {'F1':>8s}")
        for name, m in report.rows():
            click.echo(
                f"{name:28s} {percent(m.sensitivity):>12s} {percent(m.specificity):>12s} "
                f"{percent(m.f1):>8s}"
            )
    else:
        m = report.per_category["binary_abnormal"]
        click.echo(f"{'Accuracy':>10s} {'Sensitivity':>12s} {'Specificity':>12s}")
        click.echo(f"{percent(m.accuracy):>10s} {percent(m.sensitivity):>12s} {percent(m.specificity):>12s}")
    if out_path:
        write_metrics_csv(report, out_path)
        click.echo(f"wrote {out_path}")


@cli.command()
@click.option("--events", "events_path", type=click.Path(), required=True, help="Event log JSONL.")
@click.option("--kind", type=click.Choice(["coarse", "granular"]), required=True)
def agreement(events_path, kind):
    """First-round inter-annotator agreement from an event log."""
    if not Path(events_path).exists():
        raise CorpusError(f"event log not found: {events_path}")
    log = EventLog(events_path)
    rate = agreement_rate(log.events(), kind)
    click.echo(f"{kind} agreement: {rate:.1f}%")


@cli.command()
@click.option("--ratings", "ratings_path", type=click.Path(), required=True, help="CSV, one row per item, one column per rater.")
def kappa(ratings_path):
    """Fleiss' kappa over a ratings table."""
    from .metrics import fleiss_kappa
    from .validation import check_ratings_table

    path = Path(ratings_path)
    if not path.exists():
        raise CorpusError(f"ratings file not found: {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    table = check_ratings_table(rows)
    value = fleiss_kappa(table)
    click.echo(f"fleiss kappa: {value:.4f}")


@cli.command()
@click.option("--scores", "scores_path", type=click.Path(), required=True, help="JSONL with report_id and score.")
@click.option("--ref", "ref_path", type=click.Path(), required=True, help="Reference label JSONL (binary_abnormal).")
@click.option("--fix-sensitivity", "target", type=float, default=None, help="Pick the operating point at this sensitivity.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write curve points as CSV.")
def roc(scores_path, ref_path, target, out_path):
    """ROC curve and AUC for scored predictions against reference labels."""
    if not Path(scores_path).exists():
        raise CorpusError(f"scores file not found: {scores_path}")
    refs = load_labels(ref_path)
    preds = []
    with Path(scores_path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            rid = record.get("report_id")
            if rid not in refs:
                raise CorpusError(f"{scores_path}:{lineno}: no reference label for {rid!r}")
            preds.append(
                ScoredPrediction(
                    report_id=rid,
                    score=float(record["score"]),
                    label=refs[rid].labels.binary_abnormal,
                )
            )
    curve = roc_curve(preds)
    click.echo(f"auc: {curve.auc:.4f} over {len(preds)} predictions")
    if target is not None:
        op = operating_point(curve, target)
        click.echo(
            f"operating point at sensitivity >= {target:.2f}: threshold {op.threshold:.6f} "
            f"(tpr {op.tpr:.3f}, specificity {op.specificity:.3f})"
        )
    if out_path:
        with Path(out_path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["threshold", "fpr", "tpr"])
            for point in curve.points:
                writer.writerow([point.threshold, point.fpr, point.tpr])
        click.echo(f"wrote {out_path}")


@cli.command("golden-test")
@click.option("--ruleset", "ruleset_path", type=click.Path(), default=None, help="Ruleset file (shipped default if omitted).")
def golden_test(ruleset_path):
    """Label the checked-in golden corpus and diff against its hand labels."""
    corpus = ingest_corpus(golden_corpus_path()).corpus
    golden = load_labels(golden_labels_path())
    labeler = ReportLabeler(ruleset=ruleset_path).fit()
    mismatches = 0
    for report in corpus:
        got = labeler.engine_.label(report)
        want = golden[report.report_id].labels
        diffs = []
        if got.binary_abnormal != want.binary_abnormal:
            diffs.append(f"binary_abnormal {want.binary_abnormal} != {got.binary_abnormal}")
        if got.status != want.status:
            diffs.append(f"status {want.status} != {got.status}")
        for cat, expected in want.categories.items():
            if got.categories[cat] != expected:
                diffs.append(f"{cat} {expected} != {got.categories[cat]}")
        if diffs:
            mismatches += 1
            click.echo(f"{report.report_id}: " + "; ".join(diffs), err=True)
    click.echo(f"{mismatches} mismatches over {len(corpus)} golden reports")
    if mismatches:
        raise GoldenMismatch(f"{mismatches} golden mismatches")


@cli.command()
@click.option("--config", "config_path", type=click.Path(), required=True, help="Service config JSON.")
def serve(config_path):
    """Run the HTTP service."""
    run_service(ServiceConfig.from_file(config_path))


def run(argv: list[str] | None = None) -> int:
    """Dispatch argv and map failures onto the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except GoldenMismatch:
        return EXIT_MISMATCH
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except (CorpusError, RulesetError, MetricsError, WorkflowError, OSError, json.JSONDecodeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
