export type TaskKind = "coarse" | "granular";

export type LabelStatus = "labelled" | "skipped" | "consensus" | "bad_scan";

export interface Report {
  report_id: string;
  report_text: string;
  clinical_information: string;
  meta?: Record<string, string>;
}

export interface CategoryInfo {
  category: string;
  description: string;
  codebook_ref: string;
  core: boolean;
}

/** Exact label JSONL record shape the service stores in its event log. */
export interface LabelPayload {
  binary_abnormal: 0 | 1;
  categories: Record<string, 0 | 1>;
  status: LabelStatus;
}

export interface EvidenceSpan {
  rule_id: string;
  category: string;
  sentence_index: number;
  span: [number, number];
  polarity_final: "asserted" | "negated" | "hedged_asserted" | "ignored";
  co_labels: string[];
  matched_text: string;
}

export interface SentenceView {
  index: number;
  text: string;
  source: "clinical_information" | "report_text";
}

/** Response of POST /label: a label record plus confidences and evidence. */
export interface LabelResponse extends LabelPayload {
  report_id: string;
  source: string;
  confidences: Record<string, number>;
  evidence: EvidenceSpan[];
  sentences?: SentenceView[];
}

export interface AdjudicationTaskView {
  task_id: string;
  report_id: string;
  task_kind: TaskKind;
  contributing_event_ids: string[];
  disagreeing_categories: string[];
  binary_conflict: boolean;
  state: "open" | "resolved";
}

export interface FinalLabelView extends LabelPayload {
  report_id: string;
  source: string;
  provenance: "unanimous" | "majority_with_tiebreak" | "consensus_meeting";
}

export function emptyCategories(categories: string[]): Record<string, 0 | 1> {
  const out: Record<string, 0 | 1> = {};
  for (const cat of categories) out[cat] = 0;
  return out;
}
