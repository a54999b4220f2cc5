import pytest

from neurolabel import Corpus, Report
from neurolabel.annotation import (
    AdjudicationTask,
    AnnotationWorkflow,
    EventLog,
    FinalLabel,
    WorkflowError,
    adjudicate_coarse,
    adjudicate_granular,
    agreement_rate,
)
from neurolabel.labels import LabelSet

from simulation import run_coarse_campaign, run_granular_campaign, synthetic_corpus


def small_corpus(n=3):
    return Corpus(
        corpus_id="t",
        reports=tuple(Report(report_id=f"r{i}", report_text=f"Report {i}.") for i in range(n)),
    )


def abnormal(**categories):
    cats = dict(categories)
    return LabelSet(binary_abnormal=1 if any(cats.values()) else 0, categories=cats)


@pytest.fixture()
def workflow():
    wf = AnnotationWorkflow(small_corpus())
    wf.register_annotator("alice", "neuroradiologist")
    wf.register_annotator("bob", "neuroradiologist")
    wf.register_annotator("carol", "neuroradiologist")
    return wf


class TestQueue:
    def test_fresh_annotator_gets_first_report(self, workflow):
        assert workflow.next_report("alice", "coarse").report_id == "r0"

    def test_exhausted_annotator_gets_none(self, workflow):
        for rid in ("r0", "r1", "r2"):
            workflow.submit("alice", rid, "coarse", LabelSet.normal())
        assert workflow.next_report("alice", "coarse") is None

    def test_skipped_report_not_reserved_until_review_pass(self, workflow):
        workflow.submit("alice", "r0", "coarse", LabelSet.normal())
        workflow.submit("alice", "r1", "coarse", LabelSet(status="skipped"))
        assert workflow.next_report("alice", "coarse").report_id == "r2"
        workflow.submit("alice", "r2", "coarse", LabelSet.normal())
        assert workflow.next_report("alice", "coarse") is None
        review = workflow.next_report("alice", "coarse", review_skipped=True)
        assert review.report_id == "r1"

    def test_unknown_annotator_rejected(self, workflow):
        with pytest.raises(WorkflowError):
            workflow.next_report("mallory", "coarse")

    def test_unknown_kind_rejected(self, workflow):
        with pytest.raises(WorkflowError):
            workflow.next_report("alice", "weekly")


class TestSubmit:
    def test_labelled_payload_opens_no_task(self, workflow):
        workflow.submit("alice", "r0", "coarse", LabelSet.normal())
        assert workflow.open_tasks() == []

    def test_consensus_status_opens_task(self, workflow):
        workflow.submit("alice", "r0", "granular", LabelSet(status="consensus"))
        tasks = workflow.open_tasks("granular")
        assert len(tasks) == 1
        assert tasks[0].report_id == "r0"

    def test_bad_scan_with_positive_category_rejected(self, workflow):
        bad = LabelSet(binary_abnormal=1, categories={"mass": 1}, status="bad_scan")
        with pytest.raises(ValueError):
            workflow.submit("alice", "r0", "coarse", bad)

    def test_unknown_report_rejected(self, workflow):
        with pytest.raises(WorkflowError, match="zz"):
            workflow.submit("alice", "zz", "coarse", LabelSet.normal())

    def test_resubmission_supersedes_with_audit_trail(self, workflow):
        first = workflow.submit("alice", "r0", "coarse", LabelSet.normal())
        second = workflow.submit("alice", "r0", "coarse", abnormal(mass=1))
        assert second.supersedes == first.event_id
        events = workflow.log.events()
        assert len(events) == 2  # append-only: both kept


class TestAdjudicateCoarse:
    def events_for(self, workflow, votes):
        annotators = ["alice", "bob", "carol"]
        for annotator, vote in zip(annotators, votes):
            workflow.submit(annotator, "r0", "coarse", LabelSet(binary_abnormal=vote))
        return [e for e in workflow.log.events() if e.report_id == "r0"]

    def test_agreement_is_unanimous_final(self, workflow):
        outcome = adjudicate_coarse(self.events_for(workflow, [1, 1]))
        assert isinstance(outcome, FinalLabel)
        assert outcome.provenance == "unanimous"
        assert outcome.labels.binary_abnormal == 1

    def test_tie_with_third_vote(self, workflow):
        outcome = adjudicate_coarse(self.events_for(workflow, [1, 0, 0]))
        assert isinstance(outcome, FinalLabel)
        assert outcome.provenance == "majority_with_tiebreak"
        assert outcome.labels.binary_abnormal == 0

    def test_tie_without_third_is_open_task(self, workflow):
        outcome = adjudicate_coarse(self.events_for(workflow, [1, 0]))
        assert isinstance(outcome, AdjudicationTask)
        assert outcome.binary_conflict

    def test_single_event_rejected(self, workflow):
        with pytest.raises(WorkflowError):
            adjudicate_coarse(self.events_for(workflow, [1]))

    def test_same_annotator_twice_not_two_events(self, workflow):
        workflow.submit("alice", "r0", "coarse", LabelSet.normal())
        workflow.submit("alice", "r0", "coarse", LabelSet.normal())
        events = [e for e in workflow.log.events() if e.report_id == "r0"]
        with pytest.raises(WorkflowError):
            adjudicate_coarse(events)


class TestAdjudicateGranular:
    def submit_three(self, workflow, payloads):
        for annotator, payload in zip(["alice", "bob", "carol"], payloads):
            workflow.submit(annotator, "r0", "granular", payload)
        return [e for e in workflow.log.events() if e.report_id == "r0"]

    def test_unanimous(self, workflow):
        same = abnormal(mass=1)
        outcome = adjudicate_granular(self.submit_three(workflow, [same, same, same]))
        assert isinstance(outcome, FinalLabel)
        assert outcome.provenance == "unanimous"

    def test_disagreement_lists_exactly_the_conflicting_categories(self, workflow):
        a = abnormal(mass=1, hydrocephalus=1)
        b = abnormal(mass=1)
        outcome = adjudicate_granular(self.submit_three(workflow, [a, b, a]))
        assert isinstance(outcome, AdjudicationTask)
        assert outcome.disagreeing_categories == ["hydrocephalus"]

    def test_resolution_closes_with_consensus_meeting(self, workflow):
        a = abnormal(mass=1, hydrocephalus=1)
        b = abnormal(mass=1)
        self.submit_three(workflow, [a, b, a])
        workflow.resolve("r0", "granular", a, ["alice", "bob", "carol"])
        finals = workflow.finals("granular")
        assert finals["r0"].provenance == "consensus_meeting"
        assert workflow.open_tasks("granular") == []

    def test_two_events_rejected(self, workflow):
        a = abnormal(mass=1)
        events = self.submit_three(workflow, [a, a])
        with pytest.raises(WorkflowError):
            adjudicate_granular(events)


class TestAgreementRate:
    def test_full_agreement(self):
        wf = run_coarse_campaign(40, disagreement_rate=0.0, seed=3)
        assert wf.agreement_rate("coarse") == 100.0

    def test_19_of_20(self):
        wf = run_coarse_campaign(20, disagreement_rate=0.05, seed=3)
        assert wf.agreement_rate("coarse") == 95.0

    def test_granular_one_conflict_in_forty(self):
        wf = run_granular_campaign(40, disagreement_rate=1 / 40, seed=9)
        assert wf.agreement_rate("granular") == 97.5

    def test_incomplete_first_round_rejected(self, workflow):
        workflow.submit("alice", "r0", "coarse", LabelSet.normal())
        with pytest.raises(WorkflowError):
            workflow.agreement_rate("coarse")


class TestWorkflowProperties:
    def test_liveness_every_report_reaches_exactly_one_final(self):
        wf = run_granular_campaign(120, disagreement_rate=0.2, seed=21)
        finals = wf.finals("granular")
        assert set(finals) == set(synthetic_corpus(120).report_ids())

    def test_safety_no_final_while_task_open(self, workflow):
        a = abnormal(mass=1)
        b = abnormal(vascular=1)
        workflow.submit("alice", "r0", "granular", a)
        workflow.submit("bob", "r0", "granular", b)
        workflow.submit("carol", "r0", "granular", a)
        assert "r0" not in workflow.finals("granular")
        assert len(workflow.open_tasks("granular")) == 1

    def test_replay_reproduces_finals(self, tmp_path):
        log_path = tmp_path / "events.jsonl"
        wf = run_granular_campaign(60, disagreement_rate=0.15, seed=5, log_path=log_path)
        original = {rid: f.labels.categories for rid, f in wf.finals("granular").items()}
        replayed = AnnotationWorkflow(synthetic_corpus(60), EventLog(log_path))
        again = {rid: f.labels.categories for rid, f in replayed.finals("granular").items()}
        assert original == again

    def test_skipped_reports_never_auto_finalized(self, workflow):
        workflow.submit("alice", "r0", "granular", LabelSet(status="skipped"))
        workflow.submit("bob", "r0", "granular", abnormal(mass=1))
        workflow.submit("carol", "r0", "granular", abnormal(mass=1))
        state = workflow.adjudication("granular")
        assert "r0" not in state.finals
        assert "r0" in state.review_queue

    def test_export_finals(self, tmp_path):
        wf = run_granular_campaign(10, disagreement_rate=0.0, seed=2)
        out = tmp_path / "finals.jsonl"
        assert wf.export_finals("granular", out) == 10
        import json

        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(rec["provenance"] == "unanimous" for rec in lines)


class TestAgreementFunction:
    def test_bad_kind_rejected(self):
        with pytest.raises(WorkflowError):
            agreement_rate([], "weekly")
