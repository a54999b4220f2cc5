import type {
  AdjudicationTaskView,
  CategoryInfo,
  FinalLabelView,
  LabelPayload,
  LabelResponse,
  Report,
  TaskKind,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

/** The service surface the UI consumes; tests substitute fakes. */
export interface Api {
  health(): Promise<{ status: string; version: string } | null>;
  categories(): Promise<CategoryInfo[]>;
  nextReport(annotator: string, kind: TaskKind, review?: boolean): Promise<Report | null>;
  submitAnnotation(
    annotatorId: string,
    reportId: string,
    kind: TaskKind,
    payload: LabelPayload,
  ): Promise<string>;
  openTasks(): Promise<AdjudicationTaskView[]>;
  resolveTask(taskId: string, payload: LabelPayload, resolvers: string[]): Promise<void>;
  finals(kind: TaskKind): Promise<FinalLabelView[]>;
  label(report: { report_text: string; clinical_information?: string }): Promise<LabelResponse>;
}

/** Thin typed client over the service HTTP API; the UI's only data path. */
export class ApiClient implements Api {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T | null> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (response.status === 204) return null;
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = String(body.detail);
      } catch {
        // body was not JSON; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; version: string } | null> {
    return this.request("/health");
  }

  categories(): Promise<CategoryInfo[]> {
    return this.request<CategoryInfo[]>("/categories") as Promise<CategoryInfo[]>;
  }

  nextReport(annotator: string, kind: TaskKind, review = false): Promise<Report | null> {
    const params = new URLSearchParams({ annotator, kind });
    if (review) params.set("review", "true");
    return this.request<Report>(`/reports/next?${params}`);
  }

  async submitAnnotation(
    annotatorId: string,
    reportId: string,
    kind: TaskKind,
    payload: LabelPayload,
  ): Promise<string> {
    const body = await this.request<{ event_id: string }>("/annotations", {
      method: "POST",
      body: JSON.stringify({
        report_id: reportId,
        annotator_id: annotatorId,
        task_kind: kind,
        payload,
      }),
    });
    return body!.event_id;
  }

  openTasks(): Promise<AdjudicationTaskView[]> {
    return this.request<AdjudicationTaskView[]>("/consensus") as Promise<AdjudicationTaskView[]>;
  }

  async resolveTask(taskId: string, payload: LabelPayload, resolvers: string[]): Promise<void> {
    await this.request(`/consensus/${taskId}`, {
      method: "POST",
      body: JSON.stringify({ payload, resolvers }),
    });
  }

  finals(kind: TaskKind): Promise<FinalLabelView[]> {
    return this.request<FinalLabelView[]>(`/finals?kind=${kind}`) as Promise<FinalLabelView[]>;
  }

  label(report: { report_text: string; clinical_information?: string }): Promise<LabelResponse> {
    return this.request<LabelResponse>("/label", {
      method: "POST",
      body: JSON.stringify(report),
    }) as Promise<LabelResponse>;
  }
}
