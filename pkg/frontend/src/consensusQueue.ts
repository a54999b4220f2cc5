import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import { clear, el } from "./dom.js";
import type { AdjudicationTaskView, LabelPayload } from "./types.js";
import { emptyCategories } from "./types.js";

interface QueueState {
  tasks: AdjudicationTaskView[];
  /** per-task category selections for the resolution form */
  drafts: Map<string, Set<string>>;
  notice: string | null;
}

/**
 * Consensus queue: open adjudication tasks with the disputed categories
 * pre-expanded, plus a group-resolution form. Resolving a task that was
 * already closed elsewhere surfaces a refresh prompt instead of failing.
 */
export class ConsensusQueue {
  readonly state: QueueState = { tasks: [], drafts: new Map(), notice: null };

  constructor(
    private readonly api: Api,
    private readonly container: HTMLElement,
    private readonly categories: string[],
    private readonly resolverIds: string[],
  ) {}

  async refresh(): Promise<void> {
    this.state.tasks = await this.api.openTasks();
    for (const task of this.state.tasks) {
      if (!this.state.drafts.has(task.task_id)) {
        this.state.drafts.set(task.task_id, new Set(task.disagreeing_categories));
      }
    }
    this.render();
  }

  draft(taskId: string): Set<string> {
    let draft = this.state.drafts.get(taskId);
    if (!draft) {
      draft = new Set();
      this.state.drafts.set(taskId, draft);
    }
    return draft;
  }

  buildPayload(taskId: string): LabelPayload {
    const selected = this.draft(taskId);
    const categories = emptyCategories(this.categories);
    for (const cat of selected) categories[cat] = 1;
    return {
      binary_abnormal: selected.size > 0 ? 1 : 0,
      categories,
      status: "labelled",
    };
  }

  async resolve(taskId: string): Promise<void> {
    try {
      await this.api.resolveTask(taskId, this.buildPayload(taskId), this.resolverIds);
      this.state.notice = `Resolved ${taskId}.`;
      this.state.drafts.delete(taskId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.state.notice = `Task ${taskId} was already resolved elsewhere - queue refreshed.`;
      } else {
        this.state.notice = `Could not resolve ${taskId}: ${String(
          err instanceof Error ? err.message : err,
        )}`;
      }
    }
    await this.refresh();
  }

  render(): void {
    clear(this.container);
    if (this.state.notice) {
      this.container.append(
        el("div", { class: "banner", "data-role": "queue-notice" }, this.state.notice),
      );
    }
    if (this.state.tasks.length === 0) {
      this.container.append(
        el("p", { class: "empty", "data-role": "queue-empty" }, "No open consensus tasks."),
      );
      return;
    }
    for (const task of this.state.tasks) {
      const draft = this.draft(task.task_id);
      const card = el("article", { class: "task", "data-task": task.task_id });
      card.append(
        el("h3", {}, `${task.report_id} (${task.task_kind})`),
        el(
          "p",
          { "data-role": "disputed" },
          task.binary_conflict
            ? "Disputed: normal vs abnormal"
            : `Disputed categories: ${task.disagreeing_categories.join(", ") || "(flagged for consensus)"}`,
        ),
      );
      const toggles = el("div", { class: "categories" });
      const expanded = new Set(task.disagreeing_categories);
      for (const cat of this.categories) {
        if (!expanded.has(cat) && !draft.has(cat) && task.disagreeing_categories.length > 0) {
          continue; // only the disputed categories are pre-expanded
        }
        toggles.append(
          el(
            "button",
            {
              class: draft.has(cat) ? "toggle active" : "toggle",
              "data-role": `resolve-toggle-${cat}`,
              onclick: () => {
                if (draft.has(cat)) draft.delete(cat);
                else draft.add(cat);
                this.render();
              },
            },
            cat,
          ),
        );
      }
      card.append(
        toggles,
        el(
          "button",
          {
            class: "submit",
            "data-role": "resolve-submit",
            onclick: () => void this.resolve(task.task_id),
          },
          "Record group decision",
        ),
      );
      this.container.append(card);
    }
  }
}
