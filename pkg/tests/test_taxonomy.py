import json

import pytest

from neurolabel import RulesetError, load_ruleset, save_ruleset, validate_ruleset
from neurolabel.taxonomy import (
    CATEGORIES,
    CORE_CATEGORIES,
    Rule,
    RuleSet,
    list_categories,
    load_codebook,
)

# Frozen after transcribing the codebook; update deliberately when rules change.
EXPECTED_RULE_COUNT = 144


class TestShippedRuleset:
    def test_loads_with_expected_size(self, ruleset):
        assert len(ruleset.rules) == EXPECTED_RULE_COUNT
        assert len(ruleset.rules) >= 120

    def test_covers_all_categories(self, ruleset):
        rule_categories = {r.category for r in ruleset.rules}
        for cat in CATEGORIES:
            assert cat in rule_categories, f"no rule targets {cat}"

    def test_validates_clean(self, ruleset):
        assert validate_ruleset(ruleset) == []

    def test_severity_lexicon_contract(self, ruleset):
        assert ruleset.severity_lexicon["mild to moderate"] == 2
        assert ruleset.severity_lexicon["mild"] == 1
        assert ruleset.severity_lexicon["severe"] == 3

    def test_save_load_identity(self, ruleset, tmp_path):
        path = tmp_path / "ruleset.jsonl"
        save_ruleset(ruleset, path)
        again = load_ruleset(path)
        assert again == ruleset
        path2 = tmp_path / "ruleset2.jsonl"
        save_ruleset(again, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_no_duplicate_rule_shape(self, ruleset):
        shapes = [(r.category, r.triggers, r.polarity) for r in ruleset.rules]
        assert len(shapes) == len(set(shapes))


class TestCodebookCoverage:
    def test_every_bullet_cited_by_a_rule(self, ruleset):
        codebook = load_codebook()
        bullet_ids = {b["id"] for s in codebook["sections"] for b in s["bullets"]}
        cited = {r.provenance for r in ruleset.rules}
        uncited = sorted(bullet_ids - cited)
        assert not uncited, f"codebook bullets with no rule: {uncited}"

    def test_every_provenance_is_a_known_bullet(self, ruleset):
        codebook = load_codebook()
        bullet_ids = {b["id"] for s in codebook["sections"] for b in s["bullets"]}
        unknown = sorted({r.provenance for r in ruleset.rules} - bullet_ids)
        assert not unknown, f"rules citing unknown bullets: {unknown}"

    def test_atrophy_rules_flagged_standin(self):
        codebook = load_codebook()
        atrophy = next(s for s in codebook["sections"] if s["id"] == "atrophy")
        assert atrophy.get("standin") is True


class TestLoadErrors:
    def header(self):
        return {
            "version": "t",
            "negation_cues": ["no"],
            "hedge_cues": ["possible"],
            "severity_lexicon": {"mild": 1, "mild to moderate": 2, "severe": 3},
            "differential_markers": ["or"],
            "leading_markers": ["likely"],
        }

    def write(self, path, rules):
        with path.open("w") as fh:
            fh.write(json.dumps(self.header()) + "\n")
            for r in rules:
                fh.write(json.dumps(r) + "\n")

    def test_unknown_category(self, tmp_path):
        path = tmp_path / "rs.jsonl"
        self.write(path, [{"rule_id": "x", "category": "masss", "triggers": ["cyst"], "provenance": "p"}])
        with pytest.raises(RulesetError, match="masss"):
            load_ruleset(path)

    def test_duplicate_rule_id(self, tmp_path):
        path = tmp_path / "rs.jsonl"
        rule = {"rule_id": "mass.cyst.01", "category": "mass", "triggers": ["cyst"], "provenance": "p"}
        self.write(path, [rule, rule])
        with pytest.raises(RulesetError, match="mass.cyst.01"):
            load_ruleset(path)

    def test_empty_triggers(self, tmp_path):
        path = tmp_path / "rs.jsonl"
        self.write(path, [{"rule_id": "x", "category": "mass", "triggers": [], "provenance": "p"}])
        with pytest.raises(RulesetError, match="trigger"):
            load_ruleset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(RulesetError):
            load_ruleset(tmp_path / "nope.jsonl")


class TestValidateDiagnostics:
    def base(self, rules):
        return RuleSet(
            version="t",
            rules=tuple(rules),
            negation_cues=("no",),
            hedge_cues=("possible",),
            severity_lexicon={"mild": 1, "mild to moderate": 2},
            differential_markers=("or",),
            leading_markers=("likely",),
        )

    def test_self_co_label(self):
        rs = self.base([
            Rule(rule_id="x", category="mass", triggers=("cyst",), co_labels=("mass",), provenance="p")
        ])
        diagnostics = validate_ruleset(rs)
        assert len(diagnostics) == 1
        assert diagnostics[0].rule_id == "x"
        assert "co_label" in diagnostics[0].reason

    def test_empty_severity_lexicon(self):
        rs = RuleSet(
            version="t",
            rules=(Rule(rule_id="x", category="mass", triggers=("cyst",), provenance="p"),),
            negation_cues=("no",),
            hedge_cues=("possible",),
            severity_lexicon={},
        )
        diagnostics = validate_ruleset(rs)
        assert len(diagnostics) == 1
        assert "fazekas" in diagnostics[0].reason.lower()

    def test_bad_trigger_pattern(self):
        rs = self.base([
            Rule(rule_id="x", category="mass", triggers=("* *",), provenance="p")
        ])
        assert any("wildcard" in d.reason for d in validate_ruleset(rs))

    def test_gate_only_on_fazekas(self):
        rs = self.base([
            Rule(rule_id="x", category="mass", triggers=("cyst",), severity_gate=2, provenance="p")
        ])
        assert any("fazekas" in d.reason for d in validate_ruleset(rs))


class TestListCategories:
    def test_order_and_size(self, ruleset):
        infos = list_categories(ruleset)
        assert len(infos) == 13
        assert infos[0].category == "fazekas"
        assert infos[1].category == "mass"
        assert [i.category for i in infos[:12]] == list(CORE_CATEGORIES)

    def test_extended_category_flagged(self, ruleset):
        infos = {i.category: i for i in list_categories(ruleset)}
        assert infos["intracranial_misc"].core is False
        for cat in CORE_CATEGORIES:
            assert infos[cat].core is True
