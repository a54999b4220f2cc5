import json
import random

import pytest

from neurolabel import Corpus, CorpusError, LabelSet, Report
from neurolabel.corpus import (
    export_labels,
    ingest_corpus,
    load_labels,
    normalize_text,
    split_corpus,
    write_corpus,
)


def make_corpus(n, corpus_id="c"):
    reports = tuple(
        Report(report_id=f"r{i:03d}", report_text=f"Report number {i}.") for i in range(n)
    )
    return Corpus(corpus_id=corpus_id, reports=reports)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


class TestNormalizeText:
    def test_line_endings_unified(self):
        assert normalize_text("a\r\nb\rc") == "a\nb\nc"

    def test_inline_whitespace_collapsed(self):
        assert normalize_text("No  acute\t infarct.") == "No acute infarct."

    def test_punctuation_preserved(self):
        assert normalize_text("One. Two! Three?") == "One. Two! Three?"

    def test_idempotent(self):
        text = normalize_text("  a \t b\r\n c  ")
        assert normalize_text(text) == text


class TestIngest:
    def test_all_valid(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [
            {"report_id": "a", "report_text": "One."},
            {"report_id": "b", "report_text": "Two."},
            {"report_id": "c", "report_text": "Three."},
        ])
        result = ingest_corpus(path)
        assert result.report_count == 3
        assert result.rejection_count == 0

    def test_missing_report_text_rejected_with_field_name(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [{"report_id": "a"}])
        result = ingest_corpus(path)
        assert result.report_count == 0
        assert result.rejection_count == 1
        lineno, reason = result.rejections[0]
        assert lineno == 1
        assert "report_text" in reason

    def test_duplicate_id_first_wins(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [
            {"report_id": "r1", "report_text": "First."},
            {"report_id": "r1", "report_text": "Second."},
        ])
        result = ingest_corpus(path)
        assert result.report_count == 1
        assert result.corpus["r1"].report_text == "First."
        assert "duplicate" in result.rejections[0][1]

    def test_no_line_silently_dropped(self, tmp_path):
        records = [
            {"report_id": "a", "report_text": "One."},
            {"report_id": "a", "report_text": "Dup."},
            {"report_id": ""},
            {"report_id": "b", "report_text": "  "},
            {"report_id": "c", "report_text": "Fine."},
        ]
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, records)
        result = ingest_corpus(path)
        assert result.report_count + result.rejection_count == len(records)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(CorpusError):
            ingest_corpus(tmp_path / "missing.jsonl")

    def test_bad_json_line_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"report_id": "a", "report_text": "ok."}\nnot json\n')
        result = ingest_corpus(path)
        assert result.report_count == 1
        assert result.rejection_count == 1

    def test_roundtrip_byte_identical(self, tmp_path, golden_corpus):
        first = tmp_path / "first.jsonl"
        second = tmp_path / "second.jsonl"
        write_corpus(golden_corpus, first)
        result = ingest_corpus(first)
        assert not result.rejections
        write_corpus(result.corpus, second)
        assert first.read_bytes() == second.read_bytes()
        assert [r.report_id for r in result.corpus] == [r.report_id for r in golden_corpus]
        assert [r.report_text for r in result.corpus] == [r.report_text for r in golden_corpus]


class TestSplit:
    def test_half_and_half_deterministic(self):
        corpus = make_corpus(100)
        a1, b1 = split_corpus(corpus, [0.5, 0.5], seed=7)
        a2, b2 = split_corpus(corpus, [0.5, 0.5], seed=7)
        assert len(a1) == len(b1) == 50
        assert a1.report_ids() == a2.report_ids()
        assert b1.report_ids() == b2.report_ids()

    def test_identity_split(self):
        corpus = make_corpus(3)
        (only,) = split_corpus(corpus, [1.0], seed=0)
        assert only.report_ids() == corpus.report_ids()

    def test_rounding(self):
        corpus = make_corpus(5)
        a, b = split_corpus(corpus, [0.6, 0.4], seed=1)
        assert sorted([len(a), len(b)]) == [2, 3]
        assert len(a) == 3

    def test_disjoint_exhaustive_many_fraction_vectors(self):
        rng = random.Random(11)
        corpus = make_corpus(37)
        for _ in range(25):
            k = rng.randint(1, 5)
            raw = [rng.random() + 0.05 for _ in range(k)]
            total = sum(raw)
            fractions = [x / total for x in raw]
            parts = split_corpus(corpus, fractions, seed=rng.randint(0, 999))
            ids = [rid for part in parts for rid in part.report_ids()]
            assert len(ids) == len(corpus)
            assert set(ids) == set(corpus.report_ids())
            for part, fraction in zip(parts, fractions):
                assert abs(len(part) - fraction * len(corpus)) <= 1

    def test_bad_fractions(self):
        corpus = make_corpus(4)
        with pytest.raises(CorpusError):
            split_corpus(corpus, [0.5, 0.4], seed=0)
        with pytest.raises(CorpusError):
            split_corpus(corpus, [1.5, -0.5], seed=0)

    def test_empty_corpus(self):
        with pytest.raises(CorpusError):
            split_corpus(make_corpus(0), [1.0], seed=0)


class TestExportLabels:
    def test_partial_export(self, tmp_path):
        corpus = make_corpus(3)
        labels = {
            "r000": LabelSet(binary_abnormal=1, categories={"mass": 1}),
            "r002": LabelSet.normal(),
        }
        path = tmp_path / "labels.jsonl"
        assert export_labels(corpus, labels, path) == 2
        loaded = load_labels(path)
        assert set(loaded) == {"r000", "r002"}
        assert loaded["r000"].labels.categories["mass"] == 1

    def test_unknown_id_rejected(self, tmp_path):
        corpus = make_corpus(2)
        with pytest.raises(CorpusError, match="zz"):
            export_labels(corpus, {"zz": LabelSet.normal()}, tmp_path / "x.jsonl")

    def test_empty_map_writes_empty_file(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        assert export_labels(make_corpus(2), {}, path) == 0
        assert path.read_text() == ""
