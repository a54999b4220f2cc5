"""neurolabel: a labelling workbench for free-text neuroradiology reports.

Deterministic rule-based labelling against a clinical codebook, a
multi-annotator consensus workflow, and the agreement / validation metrics
used to audit both.
"""

from .corpus import (
    Corpus,
    CorpusError,
    Report,
    export_labels,
    ingest_corpus,
    load_labels,
    split_corpus,
    write_corpus,
)
from .engine import EngineConfig, RuleEngine, confidence_score, label_report
from .labeler import ReportLabeler, label_corpus
from .labels import LabelSet, ResolvedMatch
from .metrics import (
    ConfusionMatrix,
    MetricReport,
    Metrics,
    MetricsError,
    RocCurve,
    ScoredPrediction,
    build_metric_report,
    confusion,
    derive_metrics,
    fleiss_kappa,
    macro_average,
    operating_point,
    roc,
)
from .taxonomy import (
    BINARY_ABNORMAL,
    CATEGORIES,
    CORE_CATEGORIES,
    Rule,
    RuleSet,
    RulesetError,
    list_categories,
    load_default_ruleset,
    load_ruleset,
    save_ruleset,
    validate_ruleset,
)

__version__ = "0.1.0"

__all__ = [
    "BINARY_ABNORMAL",
    "CATEGORIES",
    "CORE_CATEGORIES",
    "ConfusionMatrix",
    "Corpus",
    "CorpusError",
    "EngineConfig",
    "LabelSet",
    "MetricReport",
    "Metrics",
    "MetricsError",
    "Report",
    "ReportLabeler",
    "ResolvedMatch",
    "RocCurve",
    "Rule",
    "RuleEngine",
    "RuleSet",
    "RulesetError",
    "ScoredPrediction",
    "build_metric_report",
    "confidence_score",
    "confusion",
    "derive_metrics",
    "export_labels",
    "fleiss_kappa",
    "ingest_corpus",
    "label_corpus",
    "label_report",
    "list_categories",
    "load_default_ruleset",
    "load_labels",
    "load_ruleset",
    "macro_average",
    "operating_point",
    "roc",
    "save_ruleset",
    "split_corpus",
    "validate_ruleset",
    "write_corpus",
    "__version__",
]
