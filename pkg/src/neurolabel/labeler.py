"""Scikit-learn style estimator wrapping the rule engine, plus batch
labelling helpers for corpus files.

The labeller is stateless in the statistical sense: ``fit`` resolves and
validates the ruleset, and prediction is a pure function of the input text.
It still follows the estimator contract (``get_params`` / ``set_params``,
fitted attributes with trailing underscores) so it composes with pipelines
and model-selection tooling.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .corpus import Corpus, export_labels
from .engine import EngineConfig, RuleEngine
from .labels import BINARY_ABNORMAL, LabelSet
from .taxonomy import (
    CATEGORIES,
    RuleSet,
    load_default_ruleset,
    load_ruleset,
    validate_ruleset,
)
from .validation import check_reports


class ReportLabeler(TransformerMixin, BaseEstimator):
    """Deterministic rule-based labeller with an estimator interface.

    Parameters
    ----------
    ruleset : RuleSet, str, Path or None
        A loaded ruleset, a path to a ruleset file, or None for the shipped
        default.
    negation_window, hedge_window, leading_window, severity_window : int
        Token windows for cue scoping.
    use_clinical_information : bool
        Whether clinical-information sentences take part in matching.
    """

    def __init__(
        self,
        ruleset=None,
        negation_window: int = 6,
        hedge_window: int = 6,
        leading_window: int = 6,
        severity_window: int = 2,
        use_clinical_information: bool = True,
    ):
        self.ruleset = ruleset
        self.negation_window = negation_window
        self.hedge_window = hedge_window
        self.leading_window = leading_window
        self.severity_window = severity_window
        self.use_clinical_information = use_clinical_information

    # -- estimator API ------------------------------------------------------

    def fit(self, X=None, y=None):
        """Resolve and validate the ruleset; X and y are accepted for API
        compatibility and ignored."""
        ruleset = self.ruleset
        if ruleset is None:
            ruleset = load_default_ruleset()
        elif isinstance(ruleset, (str, Path)):
            ruleset = load_ruleset(ruleset)
        elif not isinstance(ruleset, RuleSet):
            raise ValueError(f"ruleset must be a RuleSet or a path, got {type(ruleset).__name__}")
        problems = validate_ruleset(ruleset)
        if problems:
            raise ValueError(
                "invalid ruleset: " + "; ".join(str(p) for p in problems[:5])
            )
        config = EngineConfig(
            negation_window=self.negation_window,
            hedge_window=self.hedge_window,
            leading_window=self.leading_window,
            severity_window=self.severity_window,
            use_clinical_information=self.use_clinical_information,
        )
        self.ruleset_ = ruleset
        self.engine_ = RuleEngine(ruleset, config)
        self.categories_ = list(CATEGORIES)
        return self

    def _check_fitted(self) -> RuleEngine:
        engine = getattr(self, "engine_", None)
        if engine is None:
            raise NotFittedError("this ReportLabeler is not fitted yet; call fit first")
        return engine

    def label_sets(self, X) -> list[LabelSet]:
        """Full label sets (status, confidences, evidence) for each input."""
        engine = self._check_fitted()
        return [engine.label(report) for report in check_reports(X)]

    def transform(self, X) -> np.ndarray:
        """Per-category binary indicator matrix, one column per category."""
        labels = self.label_sets(X)
        return np.array(
            [[ls.categories[c] for c in self.categories_] for ls in labels], dtype=int
        )

    def predict(self, X) -> np.ndarray:
        """Binary abnormal flag per report."""
        return np.array([ls.binary_abnormal for ls in self.label_sets(X)], dtype=int)

    def decision_function(self, X) -> np.ndarray:
        """Abnormality confidence per report."""
        return np.array(
            [ls.confidences[BINARY_ABNORMAL] for ls in self.label_sets(X)], dtype=float
        )

    def predict_proba(self, X) -> np.ndarray:
        """Two-column (normal, abnormal) confidence matrix."""
        scores = self.decision_function(X)
        return np.column_stack([1.0 - scores, scores])

    def get_feature_names_out(self, input_features=None):
        self._check_fitted()
        return np.asarray(self.categories_, dtype=object)


def label_corpus(
    corpus: Corpus,
    labeler: ReportLabeler,
    labels_path: str | Path,
    evidence_path: str | Path | None = None,
    source: str = "rules",
) -> dict[str, LabelSet]:
    """Label every report, write the label file and (optionally) the
    evidence file, and return the label sets in corpus order.

    Output is byte-stable: identical corpus and ruleset produce identical
    files.
    """
    labeler._check_fitted()
    results: dict[str, LabelSet] = {}
    for report in corpus:
        results[report.report_id] = labeler.engine_.label(report)
    export_labels(corpus, results, labels_path, source=source)
    if evidence_path is not None:
        with Path(evidence_path).open("w", encoding="utf-8") as fh:
            for report in corpus:
                for match in results[report.report_id].evidence:
                    record = {
                        "report_id": report.report_id,
                        "rule_id": match.rule_id,
                        "sentence_index": match.sentence_index,
                        "span": list(match.span),
                        "polarity_final": match.polarity_final,
                    }
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return results
