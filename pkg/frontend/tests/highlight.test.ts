import { describe, expect, it } from "vitest";

import { segmentSentence, spansBySentence } from "../src/highlight.js";
import type { EvidenceSpan } from "../src/types.js";

function span(
  start: number,
  end: number,
  polarity: EvidenceSpan["polarity_final"] = "asserted",
  ruleId = "rule.x",
): EvidenceSpan {
  return {
    rule_id: ruleId,
    category: "mass",
    sentence_index: 0,
    span: [start, end],
    polarity_final: polarity,
    co_labels: [],
    matched_text: "",
  };
}

describe("segmentSentence", () => {
  const sentence = "There is a cavernoma in the pons.";

  it("splits around one highlighted span", () => {
    const start = sentence.indexOf("cavernoma");
    const segments = segmentSentence(sentence, [span(start, start + 9)]);
    expect(segments.map((s) => s.text).join("")).toBe(sentence);
    expect(segments.map((s) => s.highlighted)).toEqual([false, true, false]);
  });

  it("ignores negated and ignored matches", () => {
    const segments = segmentSentence(sentence, [span(11, 20, "negated"), span(11, 20, "ignored")]);
    expect(segments).toHaveLength(1);
    expect(segments[0]!.highlighted).toBe(false);
  });

  it("merges overlapping spans and collects rule ids", () => {
    const segments = segmentSentence("chronic subdural haematoma seen", [
      span(0, 26, "asserted", "a"),
      span(8, 26, "asserted", "b"),
    ]);
    const marked = segments.find((s) => s.highlighted)!;
    expect(marked.text).toBe("chronic subdural haematoma");
    expect(marked.ruleIds).toEqual(["a", "b"]);
  });

  it("drops spans outside the sentence", () => {
    const segments = segmentSentence("short", [span(0, 99)]);
    expect(segments.every((s) => !s.highlighted)).toBe(true);
  });

  it("round-trips text with multiple disjoint spans", () => {
    const text = "gliosis and encephalomalacia in the right frontal lobe";
    const spans = [span(0, 7), span(12, 28)];
    const segments = segmentSentence(text, spans);
    expect(segments.map((s) => s.text).join("")).toBe(text);
    expect(segments.filter((s) => s.highlighted)).toHaveLength(2);
  });
});

describe("spansBySentence", () => {
  it("buckets by sentence index", () => {
    const spans = [
      { ...span(0, 3), sentence_index: 0 },
      { ...span(4, 8), sentence_index: 2 },
      { ...span(1, 2), sentence_index: 0 },
    ];
    const buckets = spansBySentence(spans);
    expect(buckets.get(0)).toHaveLength(2);
    expect(buckets.get(2)).toHaveLength(1);
    expect(buckets.has(1)).toBe(false);
  });
});
