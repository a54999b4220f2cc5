import type { Api } from "./api.js";
import type { LabelPayload, LabelResponse, LabelStatus, Report, TaskKind } from "./types.js";
import { emptyCategories } from "./types.js";

export type SessionPhase = "idle" | "loading" | "annotating" | "exhausted";

export interface SessionState {
  phase: SessionPhase;
  report: Report | null;
  /** granular category toggles currently on */
  selected: Set<string>;
  /** coarse choice */
  binaryChoice: "normal" | "abnormal" | null;
  /** explicit all-clear confirmation on the granular screen */
  confirmedNormal: boolean;
  /** pending skip / consensus / bad-scan action */
  statusAction: Exclude<LabelStatus, "labelled"> | null;
  /** engine pre-label overlay (suggestions only, never auto-submitted) */
  overlay: LabelResponse | null;
  submittedCount: number;
  lastError: string | null;
}

/**
 * View-model for one annotator's labelling session. All mutations go through
 * methods so the submit guard (nothing is submittable until the annotator
 * made an explicit choice) and the bad-scan invariant (no categories on a
 * bad scan) hold by construction. The DOM layer renders from `state` and
 * calls these methods; tests drive them directly.
 */
export class AnnotationSession {
  readonly state: SessionState = {
    phase: "idle",
    report: null,
    selected: new Set(),
    binaryChoice: null,
    confirmedNormal: false,
    statusAction: null,
    overlay: null,
    submittedCount: 0,
    lastError: null,
  };

  private listeners: Array<() => void> = [];

  constructor(
    private readonly api: Api,
    readonly annotatorId: string,
    readonly kind: TaskKind,
    readonly categories: string[],
  ) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async start(): Promise<void> {
    await this.advance();
  }

  private clearSelections(): void {
    this.state.selected = new Set();
    this.state.binaryChoice = null;
    this.state.confirmedNormal = false;
    this.state.statusAction = null;
    this.state.overlay = null;
  }

  private async advance(): Promise<void> {
    this.state.phase = "loading";
    this.notify();
    try {
      const report = await this.api.nextReport(this.annotatorId, this.kind);
      this.clearSelections();
      this.state.report = report;
      this.state.phase = report === null ? "exhausted" : "annotating";
      this.state.lastError = null;
    } catch (err) {
      this.state.lastError = String(err instanceof Error ? err.message : err);
      this.state.phase = this.state.report ? "annotating" : "idle";
    }
    this.notify();
  }

  toggleCategory(category: string): void {
    if (this.state.phase !== "annotating") return;
    if (this.state.statusAction === "bad_scan") return; // bad scan carries no labels
    if (this.state.selected.has(category)) {
      this.state.selected.delete(category);
    } else {
      this.state.selected.add(category);
      this.state.confirmedNormal = false;
    }
    this.notify();
  }

  chooseBinary(choice: "normal" | "abnormal"): void {
    if (this.state.phase !== "annotating") return;
    this.state.binaryChoice = choice;
    this.state.statusAction = null;
    this.notify();
  }

  confirmNormal(): void {
    if (this.state.phase !== "annotating") return;
    this.state.selected = new Set();
    this.state.confirmedNormal = true;
    this.state.statusAction = null;
    this.notify();
  }

  markStatus(action: Exclude<LabelStatus, "labelled">): void {
    if (this.state.phase !== "annotating") return;
    this.state.statusAction = action;
    if (action === "bad_scan") {
      // the bad-scan button clears any category selection
      this.state.selected = new Set();
      this.state.binaryChoice = null;
      this.state.confirmedNormal = false;
    }
    this.notify();
  }

  /** Submit stays disabled until a status or an explicit label choice exists. */
  canSubmit(): boolean {
    if (this.state.phase !== "annotating") return false;
    if (this.state.statusAction !== null) return true;
    if (this.kind === "coarse") return this.state.binaryChoice !== null;
    return this.state.selected.size > 0 || this.state.confirmedNormal;
  }

  /** The payload equals the visible selection; nothing is fabricated. */
  buildPayload(): LabelPayload {
    const categories = emptyCategories(this.categories);
    let binary: 0 | 1 = 0;
    let status: LabelStatus = "labelled";
    if (this.state.statusAction !== null) {
      status = this.state.statusAction;
    }
    if (status !== "bad_scan") {
      if (this.kind === "coarse") {
        binary = this.state.binaryChoice === "abnormal" ? 1 : 0;
      } else {
        for (const cat of this.state.selected) categories[cat] = 1;
        binary = this.state.selected.size > 0 ? 1 : 0;
      }
    }
    return { binary_abnormal: binary, categories, status };
  }

  async submit(): Promise<boolean> {
    if (!this.canSubmit() || !this.state.report) return false;
    const payload = this.buildPayload();
    try {
      await this.api.submitAnnotation(
        this.annotatorId,
        this.state.report.report_id,
        this.kind,
        payload,
      );
    } catch (err) {
      // non-blocking retry: keep the current selection untouched
      this.state.lastError = String(err instanceof Error ? err.message : err);
      this.notify();
      return false;
    }
    this.state.submittedCount += 1;
    await this.advance();
    return true;
  }

  /** Fetch engine suggestions for the current report (granular screen). */
  async fetchOverlay(): Promise<void> {
    if (!this.state.report) return;
    try {
      this.state.overlay = await this.api.label({
        report_text: this.state.report.report_text,
        clinical_information: this.state.report.clinical_information,
      });
      this.state.lastError = null;
    } catch (err) {
      this.state.lastError = String(err instanceof Error ? err.message : err);
    }
    this.notify();
  }

  /** Copy the overlay's positive categories into the selection (still manual submit). */
  acceptOverlay(): void {
    if (!this.state.overlay || this.state.statusAction === "bad_scan") return;
    this.state.selected = new Set(
      Object.entries(this.state.overlay.categories)
        .filter(([, value]) => value === 1)
        .map(([cat]) => cat),
    );
    this.state.confirmedNormal = this.state.selected.size === 0;
    this.notify();
  }

  dismissOverlay(): void {
    this.state.overlay = null;
    this.notify();
  }

  /** Keyboard shortcuts: n = normal, a = abnormal, s = skip. */
  handleKey(key: string): void {
    if (this.state.phase !== "annotating") return;
    switch (key.toLowerCase()) {
      case "n":
        if (this.kind === "coarse") this.chooseBinary("normal");
        else this.confirmNormal();
        break;
      case "a":
        if (this.kind === "coarse") this.chooseBinary("abnormal");
        break;
      case "s":
        this.markStatus("skipped");
        break;
      default:
        break;
    }
  }
}
