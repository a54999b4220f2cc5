from __future__ import annotations

import pytest

from neurolabel import ReportLabeler, Report, ingest_corpus, load_default_ruleset, load_labels
from neurolabel.taxonomy import golden_corpus_path, golden_labels_path


@pytest.fixture(scope="session")
def ruleset():
    return load_default_ruleset()


@pytest.fixture(scope="session")
def labeler(ruleset):
    return ReportLabeler(ruleset=ruleset).fit()


@pytest.fixture(scope="session")
def golden_corpus():
    result = ingest_corpus(golden_corpus_path())
    assert not result.rejections
    return result.corpus


@pytest.fixture(scope="session")
def golden_labels():
    return load_labels(golden_labels_path())


def report(text: str, clinical: str = "", report_id: str = "r") -> Report:
    return Report(report_id=report_id, report_text=text, clinical_information=clinical)
