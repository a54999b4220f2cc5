import type { Api } from "../src/api.js";
import type {
  AdjudicationTaskView,
  FinalLabelView,
  LabelPayload,
  LabelResponse,
  Report,
  TaskKind,
} from "../src/types.js";

export const CATEGORIES = [
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
  "intracranial_misc",
];

export interface SubmittedEvent {
  annotatorId: string;
  reportId: string;
  kind: TaskKind;
  payload: LabelPayload;
}

/** In-memory service double: a queue of reports plus captured submissions. */
export class FakeApi implements Api {
  submissions: SubmittedEvent[] = [];
  resolutions: Array<{ taskId: string; payload: LabelPayload; resolvers: string[] }> = [];
  tasks: AdjudicationTaskView[] = [];
  labelResponse: LabelResponse | null = null;
  failNextSubmit = false;

  private queues = new Map<string, Report[]>();

  constructor(reports: Report[] = []) {
    this.queues.set("*", [...reports]);
  }

  queueFor(annotator: string, reports: Report[]): void {
    this.queues.set(annotator, [...reports]);
  }

  async health() {
    return { status: "ok", version: "test" };
  }

  async categories() {
    return CATEGORIES.map((category) => ({
      category,
      description: category,
      codebook_ref: category,
      core: category !== "intracranial_misc",
    }));
  }

  async nextReport(annotator: string): Promise<Report | null> {
    const queue = this.queues.get(annotator) ?? this.queues.get("*")!;
    return queue.shift() ?? null;
  }

  async submitAnnotation(
    annotatorId: string,
    reportId: string,
    kind: TaskKind,
    payload: LabelPayload,
  ): Promise<string> {
    if (this.failNextSubmit) {
      this.failNextSubmit = false;
      throw new Error("service unavailable");
    }
    this.submissions.push({ annotatorId, reportId, kind, payload });
    return `event-${this.submissions.length}`;
  }

  async openTasks() {
    return this.tasks;
  }

  async resolveTask(taskId: string, payload: LabelPayload, resolvers: string[]) {
    this.resolutions.push({ taskId, payload, resolvers });
    this.tasks = this.tasks.filter((t) => t.task_id !== taskId);
  }

  async finals(): Promise<FinalLabelView[]> {
    return [];
  }

  async label(): Promise<LabelResponse> {
    if (!this.labelResponse) throw new Error("no label response configured");
    return this.labelResponse;
  }
}

export function report(id: string, text: string, clinical = ""): Report {
  return { report_id: id, report_text: text, clinical_information: clinical };
}
