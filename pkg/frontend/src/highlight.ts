import type { EvidenceSpan } from "./types.js";

export interface TextSegment {
  text: string;
  highlighted: boolean;
  ruleIds: string[];
}

/**
 * Split one sentence into plain and highlighted segments from evidence
 * spans. Spans may overlap (nested trigger matches); overlapping spans merge
 * into one highlighted segment carrying every contributing rule id.
 * Negated and ignored matches are not highlighted.
 */
export function segmentSentence(sentence: string, spans: EvidenceSpan[]): TextSegment[] {
  const active = spans
    .filter((s) => s.polarity_final === "asserted" || s.polarity_final === "hedged_asserted")
    .map((s) => ({ start: s.span[0], end: s.span[1], ruleId: s.rule_id }))
    .filter((s) => s.start >= 0 && s.end <= sentence.length && s.start < s.end)
    .sort((a, b) => a.start - b.start || b.end - a.end);

  const segments: TextSegment[] = [];
  let cursor = 0;
  let i = 0;
  while (i < active.length) {
    const first = active[i]!;
    let end = first.end;
    const ruleIds = [first.ruleId];
    let j = i + 1;
    while (j < active.length && active[j]!.start < end) {
      end = Math.max(end, active[j]!.end);
      ruleIds.push(active[j]!.ruleId);
      j++;
    }
    if (first.start > cursor) {
      segments.push({ text: sentence.slice(cursor, first.start), highlighted: false, ruleIds: [] });
    }
    segments.push({
      text: sentence.slice(first.start, end),
      highlighted: true,
      ruleIds: [...new Set(ruleIds)],
    });
    cursor = end;
    i = j;
  }
  if (cursor < sentence.length) {
    segments.push({ text: sentence.slice(cursor), highlighted: false, ruleIds: [] });
  }
  return segments.filter((s) => s.text.length > 0);
}

/** Group evidence spans by sentence index for per-sentence rendering. */
export function spansBySentence(evidence: EvidenceSpan[]): Map<number, EvidenceSpan[]> {
  const out = new Map<number, EvidenceSpan[]>();
  for (const span of evidence) {
    const bucket = out.get(span.sentence_index) ?? [];
    bucket.push(span);
    out.set(span.sentence_index, bucket);
  }
  return out;
}
