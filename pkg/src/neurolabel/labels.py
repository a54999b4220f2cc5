"""Label containers shared by the rule engine, the corpus I/O and the
annotation workflow."""

from __future__ import annotations

from dataclasses import dataclass, field

from .taxonomy import BINARY_ABNORMAL, CATEGORIES

STATUS_LABELLED = "labelled"
STATUS_SKIPPED = "skipped"
STATUS_CONSENSUS = "consensus"
STATUS_BAD_SCAN = "bad_scan"
STATUSES = (STATUS_LABELLED, STATUS_SKIPPED, STATUS_CONSENSUS, STATUS_BAD_SCAN)

POLARITY_ASSERTED = "asserted"
POLARITY_NEGATED = "negated"
POLARITY_HEDGED = "hedged_asserted"
POLARITY_IGNORED = "ignored"


@dataclass(frozen=True)
class ResolvedMatch:
    """One trigger hit after polarity, precedence and severity resolution."""

    rule_id: str
    category: str
    sentence_index: int
    span: tuple[int, int]
    polarity_final: str
    co_labels: tuple[str, ...] = ()
    matched_text: str = ""

    def to_record(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "category": self.category,
            "sentence_index": self.sentence_index,
            "span": list(self.span),
            "polarity_final": self.polarity_final,
            "co_labels": list(self.co_labels),
            "matched_text": self.matched_text,
        }


@dataclass
class LabelSet:
    """Binary abnormal flag plus per-category binary labels for one report."""

    binary_abnormal: int = 0
    categories: dict[str, int] = field(default_factory=dict)
    status: str = STATUS_LABELLED
    confidences: dict[str, float] = field(default_factory=dict)
    evidence: list[ResolvedMatch] = field(default_factory=list)

    def __post_init__(self):
        for cat in CATEGORIES:
            self.categories.setdefault(cat, 0)
        if not self.confidences:
            self.confidences = {cat: float(v) for cat, v in self.categories.items()}
            self.confidences[BINARY_ABNORMAL] = float(self.binary_abnormal)

    def problems(self) -> list[str]:
        """Invariant violations; an empty list means the label set is valid."""
        out = []
        if self.status not in STATUSES:
            out.append(f"unknown status {self.status!r}")
        if self.binary_abnormal not in (0, 1):
            out.append(f"binary_abnormal must be 0 or 1, got {self.binary_abnormal!r}")
        unknown = set(self.categories) - set(CATEGORIES)
        if unknown:
            out.append(f"unknown categories: {sorted(unknown)}")
        for cat, v in self.categories.items():
            if v not in (0, 1):
                out.append(f"category {cat} must be 0 or 1, got {v!r}")
        if any(v == 1 for v in self.categories.values()) and self.binary_abnormal != 1:
            out.append("a positive category requires binary_abnormal = 1")
        if self.status == STATUS_BAD_SCAN and (
            self.binary_abnormal or any(self.categories.values())
        ):
            out.append("bad_scan label sets must carry no positive labels")
        missing = [c for c in CATEGORIES if c not in self.confidences]
        if missing:
            out.append(f"confidences missing for: {missing}")
        for cat, score in self.confidences.items():
            if not 0.0 <= score <= 1.0:
                out.append(f"confidence for {cat} out of [0,1]: {score!r}")
        return out

    def validate(self) -> "LabelSet":
        problems = self.problems()
        if problems:
            raise ValueError("invalid label set: " + "; ".join(problems))
        return self

    def to_record(self, report_id: str, source: str) -> dict:
        """The documented label JSONL record shape."""
        return {
            "report_id": report_id,
            "binary_abnormal": self.binary_abnormal,
            "categories": {cat: self.categories[cat] for cat in CATEGORIES},
            "status": self.status,
            "source": source,
        }

    @classmethod
    def from_record(cls, record: dict) -> "LabelSet":
        return cls(
            binary_abnormal=int(record.get("binary_abnormal", 0)),
            categories={k: int(v) for k, v in dict(record.get("categories", {})).items()},
            status=record.get("status", STATUS_LABELLED),
        )

    @classmethod
    def normal(cls) -> "LabelSet":
        return cls(binary_abnormal=0)
