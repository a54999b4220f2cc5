import type { Api } from "./api.js";
import { clear, el } from "./dom.js";

/** Progress view: finals per protocol plus the open consensus backlog. */
export async function renderProgress(container: HTMLElement, api: Api): Promise<void> {
  const [coarse, granular, tasks] = await Promise.all([
    api.finals("coarse"),
    api.finals("granular"),
    api.openTasks(),
  ]);
  clear(container);
  const row = (label: string, value: number, role: string) =>
    el(
      "tr",
      {},
      el("td", {}, label),
      el("td", { "data-role": role }, String(value)),
    );
  container.append(
    el(
      "table",
      { class: "progress" },
      row("Final binary labels", coarse.length, "finals-coarse"),
      row("Final granular labels", granular.length, "finals-granular"),
      row("Open consensus tasks", tasks.length, "open-tasks"),
    ),
  );
}
