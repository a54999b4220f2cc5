"""Deterministic rule engine: segment a report into sentences, match rule
triggers, resolve negation / hedging / leading-diagnosis language, apply
severity gating and span precedence, and aggregate the surviving matches
into a label set with per-category confidences.

The engine is a pure function of (report, ruleset, config): identical inputs
always produce identical output, evidence included, so batch labelling can be
parallelised freely.

Resolution pipeline, in order:

1. polarity   - a negation cue preceding the trigger in the same clause
                within the token window negates it; a leading marker
                ("likely", "consistent with") asserts it outright; a hedge
                cue ("cannot be excluded", "possible") in the same clause
                makes it hedged; otherwise it is asserted.
2. indication - matches inside the clinical information only assert labels
                for rules flagged ``indication_ok``.
3. precedence - ignore rules block overlapping positive matches of their own
                and listed categories (longer trigger wins, ties go to the
                ignore rule); a surviving positive match blocks overlapping
                shorter matches of the categories it ``suppresses``.
4. leading    - a surviving leading-asserted match drops every hedged match
                in the same sentence; plain differential alternatives
                ("either A or B") are all kept.
5. severity   - fazekas matches with a severity gate need a clause grade at
                or above the gate; an unqualified mention grades mild.
6. status     - artefact-degraded studies route to bad_scan, nuanced cases
                (post-surgical pituitary) to consensus.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .corpus import Report, normalize_text
from .labels import (
    POLARITY_ASSERTED,
    POLARITY_HEDGED,
    POLARITY_IGNORED,
    POLARITY_NEGATED,
    STATUS_BAD_SCAN,
    STATUS_CONSENSUS,
    STATUS_LABELLED,
    LabelSet,
    ResolvedMatch,
)
from .taxonomy import (
    BINARY_ABNORMAL,
    CATEGORIES,
    POLARITY_IGNORE,
    POLARITY_POSITIVE,
    Rule,
    RuleSet,
)
from .text import SentenceSpan, Token, TriggerPattern, clause_ids, segment, tokenize

SOURCE_CLINICAL = "clinical_information"
SOURCE_REPORT = "report_text"


@dataclass(frozen=True)
class EngineConfig:
    """Tunable windows and confidence constants (documented defaults)."""

    negation_window: int = 6
    hedge_window: int = 6
    leading_window: int = 6
    severity_window: int = 4
    use_clinical_information: bool = True
    asserted_weight: float = 1.0
    hedged_weight: float = 0.6
    negation_decay: float = 0.9
    positive_threshold: float = 0.5


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    source: str
    start: int = 0
    end: int = 0


def segment_report(report: Report, use_clinical_information: bool = True) -> list[Sentence]:
    """Sentences of the clinical information (first) and the report text,
    with contiguous indices from 0."""
    sentences: list[Sentence] = []
    if use_clinical_information and report.clinical_information:
        for span in segment(normalize_text(report.clinical_information)):
            sentences.append(
                Sentence(len(sentences), span.text, SOURCE_CLINICAL, span.start, span.end)
            )
    for span in segment(normalize_text(report.report_text)):
        sentences.append(Sentence(len(sentences), span.text, SOURCE_REPORT, span.start, span.end))
    return sentences


@dataclass
class _Match:
    rule: Rule
    pattern_len: int
    sentence: Sentence
    tok_start: int
    tok_end: int
    span: tuple[int, int]
    polarity: str = POLARITY_ASSERTED
    leading: bool = False
    matched_text: str = ""
    sentence_has_negation: bool = False

    @property
    def alive(self) -> bool:
        return self.polarity in (POLARITY_ASSERTED, POLARITY_HEDGED)

    def targets(self) -> tuple[str, ...]:
        if self.rule.polarity != POLARITY_POSITIVE or not self.alive:
            return ()
        return (self.rule.category,) + self.rule.co_labels


class _SentenceScan:
    """Token-level view of one sentence with all cue positions resolved."""

    def __init__(self, sentence: Sentence, engine: "RuleEngine"):
        self.sentence = sentence
        self.tokens: list[Token] = tokenize(sentence.text)
        self.clauses = clause_ids(sentence.text, self.tokens)
        self.negations = engine.find_cues(engine._negation, self.tokens)
        self.hedges = engine.find_cues(engine._hedges, self.tokens)
        self.leads = engine.find_cues(engine._leads, self.tokens)
        self.severity = engine.find_severity(self.tokens)

    def clause_of(self, token_index: int) -> int:
        return self.clauses[token_index]

    def has_negation_cue(self) -> bool:
        return bool(self.negations)


class RuleEngine:
    """Compiled ruleset plus config; reusable across reports and threads."""

    def __init__(self, ruleset: RuleSet, config: EngineConfig | None = None):
        self.ruleset = ruleset
        self.config = config or EngineConfig()
        self._compiled: list[tuple[Rule, TriggerPattern]] = [
            (rule, TriggerPattern(phrase)) for rule in ruleset.rules for phrase in rule.triggers
        ]
        self._negation = [TriggerPattern(c) for c in ruleset.negation_cues]
        self._hedges = [TriggerPattern(c) for c in ruleset.hedge_cues]
        self._leads = [TriggerPattern(c) for c in ruleset.leading_markers]
        self._severity = [
            (TriggerPattern(term), grade) for term, grade in ruleset.severity_lexicon.items()
        ]

    # -- cue scanning -------------------------------------------------------

    def find_cues(self, patterns: list[TriggerPattern], tokens: list[Token]):
        spans = []
        for pat in patterns:
            spans.extend(pat.find(tokens))
        return spans

    def find_severity(self, tokens: list[Token]) -> list[tuple[int, int, int]]:
        out = []
        for pat, grade in self._severity:
            out.extend((s, e, grade) for s, e in pat.find(tokens))
        return out

    # -- labelling ----------------------------------------------------------

    def label(self, report: Report) -> LabelSet:
        sentences = segment_report(report, self.config.use_clinical_information)
        matches: list[_Match] = []
        status = STATUS_LABELLED
        for sentence in sentences:
            scan = _SentenceScan(sentence, self)
            found = self._scan_sentence(scan)
            status = _stronger_status(status, self._apply_status_effects(found))
            matches.extend(found)
        return self._aggregate(matches, status)

    def _scan_sentence(self, scan: _SentenceScan) -> list[_Match]:
        matches = self._raw_matches(scan)
        for m in matches:
            m.sentence_has_negation = scan.has_negation_cue()
            self._resolve_polarity(m, scan)
        self._gate_clinical_information(matches)
        self._apply_precedence(matches)
        self._apply_leading_over_hedge(matches)
        self._apply_severity_gates(matches, scan)
        return matches

    def _raw_matches(self, scan: _SentenceScan) -> list[_Match]:
        seen: set[tuple[str, int, int]] = set()
        matches = []
        for rule, pattern in self._compiled:
            for ts, te in pattern.find(scan.tokens):
                key = (rule.rule_id, ts, te)
                if key in seen:
                    continue
                seen.add(key)
                span = (scan.tokens[ts].start, scan.tokens[te - 1].end)
                matches.append(
                    _Match(
                        rule=rule,
                        pattern_len=len(pattern),
                        sentence=scan.sentence,
                        tok_start=ts,
                        tok_end=te,
                        span=span,
                        matched_text=scan.sentence.text[span[0] : span[1]],
                    )
                )
        matches.sort(key=lambda m: (m.span[0], -m.pattern_len, m.rule.rule_id))
        return matches

    def _resolve_polarity(self, m: _Match, scan: _SentenceScan) -> None:
        cfg = self.config
        clause = scan.clause_of(m.tok_start)
        for cs, ce in scan.negations:
            if ce <= m.tok_start and scan.clause_of(cs) == clause:
                if m.tok_start - ce <= cfg.negation_window:
                    m.polarity = POLARITY_NEGATED
                    return
        for ls, le in scan.leads:
            if le <= m.tok_start and scan.clause_of(ls) == clause:
                if m.tok_start - le <= cfg.leading_window:
                    m.polarity = POLARITY_ASSERTED
                    m.leading = True
                    return
        for hs, he in scan.hedges:
            before = he <= m.tok_start and m.tok_start - he <= cfg.hedge_window
            after = hs >= m.tok_end and hs - m.tok_end <= cfg.hedge_window
            if before and scan.clause_of(hs) != clause:
                before = False
            if after and scan.clause_of(hs) != scan.clause_of(m.tok_end - 1):
                after = False
            if before or after:
                m.polarity = POLARITY_HEDGED
                return
        m.polarity = POLARITY_ASSERTED

    def _gate_clinical_information(self, matches: list[_Match]) -> None:
        # Indications mention suspected findings, not confirmed ones.
        for m in matches:
            if (
                m.sentence.source == SOURCE_CLINICAL
                and m.rule.polarity == POLARITY_POSITIVE
                and not m.rule.indication_ok
                and m.alive
            ):
                m.polarity = POLARITY_IGNORED

    def _apply_precedence(self, matches: list[_Match]) -> None:
        blockers = sorted(
            (m for m in matches if m.rule.polarity == POLARITY_IGNORE or m.rule.suppresses),
            key=lambda m: (-m.pattern_len, m.rule.rule_id, m.tok_start),
        )
        for blocker in blockers:
            is_ignore = blocker.rule.polarity == POLARITY_IGNORE
            if not is_ignore and not blocker.alive:
                continue
            blocked_categories = set(blocker.rule.suppresses)
            if is_ignore:
                blocked_categories.add(blocker.rule.category)
            for m in matches:
                if m is blocker or not m.alive or m.rule.polarity != POLARITY_POSITIVE:
                    continue
                if m.rule.category not in blocked_categories:
                    continue
                if not _overlaps(blocker.span, m.span):
                    continue
                if blocker.pattern_len > m.pattern_len or (
                    is_ignore and blocker.pattern_len == m.pattern_len
                ):
                    m.polarity = POLARITY_IGNORED

    def _apply_leading_over_hedge(self, matches: list[_Match]) -> None:
        # "likely A ... B cannot be excluded" keeps A only; "either A or B"
        # has no leading marker, so both alternatives survive.
        has_leading = any(
            m.leading and m.polarity == POLARITY_ASSERTED and m.rule.polarity == POLARITY_POSITIVE
            for m in matches
        )
        if not has_leading:
            return
        for m in matches:
            if m.polarity == POLARITY_HEDGED:
                m.polarity = POLARITY_IGNORED

    def _apply_severity_gates(self, matches: list[_Match], scan: _SentenceScan) -> None:
        window = self.config.severity_window
        for m in matches:
            gate = m.rule.severity_gate
            if gate is None or not m.alive:
                continue
            grade = 1  # an unqualified mention reads as mild
            clause = scan.clause_of(m.tok_start)
            for ts, te, term_grade in scan.severity:
                if scan.clause_of(ts) != clause:
                    continue
                before = te <= m.tok_start and m.tok_start - te <= window
                after = ts >= m.tok_end and ts - m.tok_end <= window
                if before or after:
                    grade = max(grade, term_grade)
            if grade < gate:
                m.polarity = POLARITY_IGNORED

    def _apply_status_effects(self, matches: list[_Match]) -> str:
        status = STATUS_LABELLED
        for m in matches:
            if m.rule.status_effect and m.polarity != POLARITY_NEGATED:
                status = _stronger_status(status, m.rule.status_effect)
        return status

    def _aggregate(self, matches: list[_Match], status: str) -> LabelSet:
        cfg = self.config
        scores: dict[str, float] = {c: 0.0 for c in CATEGORIES}
        scores[BINARY_ABNORMAL] = 0.0
        for m in matches:
            weight = 0.0
            if m.polarity == POLARITY_ASSERTED:
                weight = cfg.asserted_weight
            elif m.polarity == POLARITY_HEDGED:
                weight = cfg.hedged_weight
            if weight == 0.0:
                continue
            if m.sentence_has_negation:
                weight *= cfg.negation_decay
            for target in m.targets():
                scores[target] = max(scores.get(target, 0.0), weight)

        categories = {c: int(scores[c] >= cfg.positive_threshold) for c in CATEGORIES}
        binary_score = max([scores[BINARY_ABNORMAL]] + [scores[c] for c in CATEGORIES])
        scores[BINARY_ABNORMAL] = binary_score
        binary = int(binary_score >= cfg.positive_threshold)

        if status == STATUS_BAD_SCAN:
            categories = {c: 0 for c in CATEGORIES}
            scores = {c: 0.0 for c in list(scores)}
            binary = 0

        evidence = [
            ResolvedMatch(
                rule_id=m.rule.rule_id,
                category=m.rule.category,
                sentence_index=m.sentence.index,
                span=m.span,
                polarity_final=m.polarity,
                co_labels=m.rule.co_labels if m.targets() else (),
                matched_text=m.matched_text,
            )
            for m in sorted(matches, key=lambda m: (m.sentence.index, m.span, m.rule.rule_id))
        ]
        confidences = {c: scores[c] for c in CATEGORIES}
        confidences[BINARY_ABNORMAL] = scores[BINARY_ABNORMAL]
        return LabelSet(
            binary_abnormal=binary,
            categories=categories,
            status=status,
            confidences=confidences,
            evidence=evidence,
        )


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _stronger_status(current: str, new: str) -> str:
    order = {STATUS_LABELLED: 0, STATUS_CONSENSUS: 1, STATUS_BAD_SCAN: 2}
    return current if order[current] >= order.get(new, 0) else new


def label_report(report: Report, ruleset: RuleSet, config: EngineConfig | None = None) -> LabelSet:
    """Label a single report. For batch work build one RuleEngine and reuse it."""
    return RuleEngine(ruleset, config).label(report)


def resolve_polarity(
    sentence_text: str,
    span: tuple[int, int],
    ruleset: RuleSet,
    config: EngineConfig | None = None,
) -> str:
    """Polarity of an arbitrary character span within one sentence.

    Exposed for rule authoring and audit; the engine applies the same logic
    to every trigger match.
    """
    cfg = config or EngineConfig()
    probe = Rule(rule_id="probe", category=CATEGORIES[0], triggers=("probe",))
    engine = RuleEngine(replace(ruleset, rules=(probe,)), cfg)
    sentence = Sentence(0, sentence_text, SOURCE_REPORT)
    scan = _SentenceScan(sentence, engine)
    tok_start = tok_end = None
    for i, tok in enumerate(scan.tokens):
        if tok.start >= span[0] and tok_start is None:
            tok_start = i
        if tok.end <= span[1]:
            tok_end = i + 1
    if tok_start is None or tok_end is None or tok_end <= tok_start:
        raise ValueError(f"span {span} does not cover any token of {sentence_text!r}")
    m = _Match(
        rule=probe,
        pattern_len=tok_end - tok_start,
        sentence=sentence,
        tok_start=tok_start,
        tok_end=tok_end,
        span=span,
    )
    engine._resolve_polarity(m, scan)
    return m.polarity


def confidence_score(labels: LabelSet, category: str) -> float:
    """Confidence for one category of an engine-produced label set."""
    return labels.confidences[category]
