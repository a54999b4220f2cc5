"""Abnormality taxonomy and the declarative labelling ruleset.

Twelve core abnormality categories plus one extended category
(``intracranial_misc``), with a derived binary abnormal flag. The shipped
ruleset (``data/ruleset.jsonl``) transcribes the clinical codebook checked in
at ``data/codebook.json``; every rule cites the codebook bullet it encodes in
its ``provenance`` field so coverage can be audited.

Ruleset file format: JSONL, one header record carrying the shared lexicons
(``version``, ``negation_cues``, ``hedge_cues``, ``severity_lexicon``,
``differential_markers``, ``leading_markers``) followed by one record per
rule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .text import TriggerPattern

# Core categories in canonical report order; the extended category comes last.
CORE_CATEGORIES = (
    "fazekas",
    "mass",
    "vascular",
    "damage",
    "acute_stroke",
    "haemorrhage",
    "hydrocephalus",
    "white_matter_inflammation",
    "foreign_body",
    "extracranial",
    "supratentorial_atrophy",
    "infratentorial_atrophy",
)
EXTENDED_CATEGORIES = ("intracranial_misc",)
CATEGORIES = CORE_CATEGORIES + EXTENDED_CATEGORIES

BINARY_ABNORMAL = "binary_abnormal"

# Values a rule may assert: a category, or the bare abnormal flag.
LABEL_TARGETS = CATEGORIES + (BINARY_ABNORMAL,)

POLARITY_POSITIVE = "positive"
POLARITY_IGNORE = "ignore"

STATUS_EFFECTS = ("bad_scan", "consensus")

_DESCRIPTIONS = {
    "fazekas": "White matter lesion load of moderate or worse grade",
    "mass": "Neoplasms, cysts and other mass lesions",
    "vascular": "Aneurysms, vascular malformations and vessel abnormality",
    "damage": "Established parenchymal injury: gliosis, cavity, chronic infarct",
    "acute_stroke": "Acute or subacute infarction",
    "haemorrhage": "Acute or subacute intracranial haemorrhage",
    "hydrocephalus": "Hydrocephalus of any chronicity, including trapped ventricle",
    "white_matter_inflammation": "Demyelinating and inflammatory white matter disease",
    "foreign_body": "Shunts, clips, coils and other implanted metalwork",
    "extracranial": "Abnormality outside the cranial cavity",
    "supratentorial_atrophy": "Supratentorial volume loss",
    "infratentorial_atrophy": "Cerebellar or brainstem volume loss",
    "intracranial_misc": "Intracranial abnormality outside the core categories",
}


@dataclass(frozen=True)
class CategoryInfo:
    category: str
    description: str
    codebook_ref: str
    core: bool


@dataclass(frozen=True)
class Rule:
    """One declarative trigger rule.

    ``triggers`` are phrase patterns (``*`` = any single token). A positive
    rule asserts its category (plus ``co_labels``) when a trigger matches and
    survives polarity resolution; an ignore rule asserts nothing and blocks
    overlapping positive matches of the categories in ``suppresses`` plus its
    own. ``severity_gate`` (fazekas only) demands a minimum severity grade in
    the surrounding clause. ``indication_ok`` lets a match inside the clinical
    information assert labels. ``status_effect`` routes the whole report to
    ``bad_scan`` or ``consensus``.
    """

    rule_id: str
    category: str
    triggers: tuple[str, ...]
    polarity: str = POLARITY_POSITIVE
    severity_gate: int | None = None
    co_labels: tuple[str, ...] = ()
    suppresses: tuple[str, ...] = ()
    provenance: str = ""
    indication_ok: bool = False
    status_effect: str | None = None

    def to_record(self) -> dict:
        record = {
            "rule_id": self.rule_id,
            "category": self.category,
            "triggers": list(self.triggers),
            "polarity": self.polarity,
            "provenance": self.provenance,
        }
        if self.severity_gate is not None:
            record["severity_gate"] = {"min_grade": self.severity_gate}
        if self.co_labels:
            record["co_labels"] = list(self.co_labels)
        if self.suppresses:
            record["suppresses"] = list(self.suppresses)
        if self.indication_ok:
            record["indication_ok"] = True
        if self.status_effect:
            record["status_effect"] = self.status_effect
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Rule":
        gate = record.get("severity_gate")
        if isinstance(gate, dict):
            gate = gate.get("min_grade")
        return cls(
            rule_id=record["rule_id"],
            category=record["category"],
            triggers=tuple(record.get("triggers", ())),
            polarity=record.get("polarity", POLARITY_POSITIVE),
            severity_gate=gate,
            co_labels=tuple(record.get("co_labels", ())),
            suppresses=tuple(record.get("suppresses", ())),
            provenance=record.get("provenance", ""),
            indication_ok=bool(record.get("indication_ok", False)),
            status_effect=record.get("status_effect"),
        )


@dataclass(frozen=True)
class RuleSet:
    version: str
    rules: tuple[Rule, ...]
    negation_cues: tuple[str, ...]
    hedge_cues: tuple[str, ...]
    severity_lexicon: dict[str, int] = field(default_factory=dict)
    differential_markers: tuple[str, ...] = ()
    leading_markers: tuple[str, ...] = ()

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.rule_id == rule_id:
                return r
        raise KeyError(rule_id)

    def header_record(self) -> dict:
        return {
            "version": self.version,
            "negation_cues": list(self.negation_cues),
            "hedge_cues": list(self.hedge_cues),
            "severity_lexicon": dict(self.severity_lexicon),
            "differential_markers": list(self.differential_markers),
            "leading_markers": list(self.leading_markers),
        }


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    reason: str

    def __str__(self) -> str:
        return f"{self.rule_id}: {self.reason}"


class RulesetError(ValueError):
    pass


def load_ruleset(path: str | Path) -> RuleSet:
    """Parse a ruleset file and reject structurally invalid content."""
    path = Path(path)
    if not path.exists():
        raise RulesetError(f"ruleset file not found: {path}")
    header = None
    rules: list[Rule] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RulesetError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if header is None:
                if "version" not in record:
                    raise RulesetError(f"{path}:1: first record must be the lexicon header")
                header = record
                continue
            rule = Rule.from_record(record)
            if rule.rule_id in seen_ids:
                raise RulesetError(f"{path}:{lineno}: duplicate rule_id {rule.rule_id!r}")
            if rule.category not in LABEL_TARGETS:
                raise RulesetError(
                    f"{path}:{lineno}: rule {rule.rule_id!r} has unknown category {rule.category!r}"
                )
            if not rule.triggers:
                raise RulesetError(f"{path}:{lineno}: rule {rule.rule_id!r} has no triggers")
            seen_ids.add(rule.rule_id)
            rules.append(rule)
    if header is None:
        raise RulesetError(f"{path}: empty ruleset file")
    return RuleSet(
        version=str(header.get("version", "")),
        rules=tuple(rules),
        negation_cues=tuple(header.get("negation_cues", ())),
        hedge_cues=tuple(header.get("hedge_cues", ())),
        severity_lexicon={k: int(v) for k, v in dict(header.get("severity_lexicon", {})).items()},
        differential_markers=tuple(header.get("differential_markers", ())),
        leading_markers=tuple(header.get("leading_markers", ())),
    )


def save_ruleset(rs: RuleSet, path: str | Path) -> None:
    """Write the canonical serialization: header first, rules in order."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(rs.header_record(), ensure_ascii=False) + "\n")
        for rule in rs.rules:
            fh.write(json.dumps(rule.to_record(), ensure_ascii=False) + "\n")


def validate_ruleset(rs: RuleSet) -> list[Diagnostic]:
    """Return one diagnostic per violated invariant; empty means valid."""
    out: list[Diagnostic] = []
    seen_ids: set[str] = set()
    seen_shapes: set[tuple] = set()
    for rule in rs.rules:
        rid = rule.rule_id
        if rid in seen_ids:
            out.append(Diagnostic(rid, "duplicate rule_id"))
        seen_ids.add(rid)
        if rule.category not in LABEL_TARGETS:
            out.append(Diagnostic(rid, f"unknown category {rule.category!r}"))
        if rule.polarity not in (POLARITY_POSITIVE, POLARITY_IGNORE):
            out.append(Diagnostic(rid, f"unknown polarity {rule.polarity!r}"))
        if not rule.triggers:
            out.append(Diagnostic(rid, "empty trigger list"))
        for phrase in rule.triggers:
            try:
                TriggerPattern(phrase)
            except ValueError as exc:
                out.append(Diagnostic(rid, str(exc)))
        if rule.category in rule.co_labels:
            out.append(Diagnostic(rid, "co_labels contains the rule's own category"))
        for co in rule.co_labels:
            if co not in LABEL_TARGETS:
                out.append(Diagnostic(rid, f"unknown co_label {co!r}"))
        for sup in rule.suppresses:
            if sup not in LABEL_TARGETS:
                out.append(Diagnostic(rid, f"unknown suppressed category {sup!r}"))
        if not rule.provenance:
            out.append(Diagnostic(rid, "empty provenance"))
        if rule.severity_gate is not None:
            if rule.category != "fazekas":
                out.append(Diagnostic(rid, "severity_gate is only valid on fazekas rules"))
            elif rule.severity_gate not in (1, 2, 3):
                out.append(Diagnostic(rid, f"severity_gate must be 1..3, got {rule.severity_gate}"))
        if rule.status_effect is not None and rule.status_effect not in STATUS_EFFECTS:
            out.append(Diagnostic(rid, f"unknown status_effect {rule.status_effect!r}"))
        shape = (rule.category, rule.triggers, rule.polarity)
        if shape in seen_shapes:
            out.append(Diagnostic(rid, "another rule has identical (category, triggers, polarity)"))
        seen_shapes.add(shape)
    if not rs.negation_cues:
        out.append(Diagnostic("<header>", "negation_cues must be non-empty"))
    if not rs.hedge_cues:
        out.append(Diagnostic("<header>", "hedge_cues must be non-empty"))
    if not rs.severity_lexicon:
        out.append(
            Diagnostic("<header>", "severity_lexicon must be non-empty (fazekas grading needs it)")
        )
    else:
        for term, grade in rs.severity_lexicon.items():
            if grade not in (1, 2, 3):
                out.append(Diagnostic("<header>", f"severity grade for {term!r} must be 1..3"))
        if rs.severity_lexicon.get("mild to moderate") != 2:
            out.append(
                Diagnostic("<header>", "severity_lexicon must map 'mild to moderate' to grade 2")
            )
    return out


def list_categories(rs: RuleSet) -> list[CategoryInfo]:
    """Category listing in canonical order: the twelve core rows, then extended."""
    refs = {}
    for rule in rs.rules:
        section = rule.provenance.split("/", 1)[0]
        refs.setdefault(rule.category, section)
    out = []
    for cat in CATEGORIES:
        out.append(
            CategoryInfo(
                category=cat,
                description=_DESCRIPTIONS[cat],
                codebook_ref=refs.get(cat, cat),
                core=cat in CORE_CATEGORIES,
            )
        )
    return out


def _data_path(name: str) -> Path:
    return Path(str(resources.files("neurolabel").joinpath("data", name)))


def default_ruleset_path() -> Path:
    return _data_path("ruleset.jsonl")


def load_default_ruleset() -> RuleSet:
    return load_ruleset(default_ruleset_path())


def codebook_path() -> Path:
    return _data_path("codebook.json")


def load_codebook() -> dict:
    """The clinical codebook the shipped ruleset transcribes."""
    with codebook_path().open(encoding="utf-8") as fh:
        return json.load(fh)


def golden_corpus_path() -> Path:
    return _data_path("golden/corpus.jsonl")


def golden_labels_path() -> Path:
    return _data_path("golden/labels.jsonl")


def with_rule(rs: RuleSet, rule: Rule) -> RuleSet:
    return replace(rs, rules=rs.rules + (rule,))
