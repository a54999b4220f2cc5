import { clear, el } from "./dom.js";
import { segmentSentence, spansBySentence } from "./highlight.js";
import type { AnnotationSession } from "./session.js";
import type { CategoryInfo } from "./types.js";

/**
 * Granular labelling screen: one toggle per category, a Normal shortcut that
 * clears and confirms an all-zero label, the three status buttons, and an
 * optional read-only engine overlay with evidence spans highlighted in the
 * report text. Suggestions never submit anything by themselves.
 */
export function renderGranularScreen(
  container: HTMLElement,
  session: AnnotationSession,
  categories: CategoryInfo[],
): void {
  const draw = (): void => {
    clear(container);
    const { state } = session;

    if (state.lastError) {
      container.append(
        el(
          "div",
          { class: "banner error", "data-role": "error-banner" },
          `Request failed: ${state.lastError} - your selection is kept; submit again to retry.`,
        ),
      );
    }
    if (state.phase === "exhausted") {
      container.append(el("p", { class: "done" }, "Queue complete - no more reports."));
      return;
    }
    if (!state.report) {
      container.append(el("p", {}, "Loading..."));
      return;
    }

    container.append(
      el(
        "section",
        { class: "clinical", "data-role": "clinical-information" },
        el("h3", {}, "Clinical information"),
        el("p", {}, state.report.clinical_information || "(none)"),
      ),
    );

    const reportPane = el("section", { class: "report", "data-role": "report-text" });
    reportPane.append(el("h3", {}, `Report ${state.report.report_id}`));
    if (state.overlay) {
      const bySentence = spansBySentence(state.overlay.evidence);
      for (const sentence of state.overlay.sentences ?? []) {
        const paragraph = el("p", { "data-sentence": String(sentence.index) });
        for (const segment of segmentSentence(sentence.text, bySentence.get(sentence.index) ?? [])) {
          paragraph.append(
            segment.highlighted
              ? el("mark", { title: segment.ruleIds.join(", ") }, segment.text)
              : document.createTextNode(segment.text),
          );
        }
        paragraph.append(document.createTextNode(" "));
        reportPane.append(paragraph);
      }
    } else {
      reportPane.append(el("p", {}, state.report.report_text));
    }
    container.append(reportPane);

    const overlayBar = el("div", { class: "overlay-bar" });
    if (state.overlay) {
      overlayBar.append(
        el("span", { "data-role": "overlay-note" }, "Engine suggestions shown (read-only)."),
        el("button", { "data-role": "overlay-accept", onclick: () => session.acceptOverlay() }, "Copy suggested labels"),
        el("button", { "data-role": "overlay-dismiss", onclick: () => session.dismissOverlay() }, "Dismiss"),
      );
    } else {
      overlayBar.append(
        el(
          "button",
          { "data-role": "overlay-fetch", onclick: () => void session.fetchOverlay() },
          "Show engine suggestions",
        ),
      );
    }
    container.append(overlayBar);

    const toggles = el("div", { class: "categories" });
    for (const info of categories) {
      const active = state.selected.has(info.category);
      toggles.append(
        el(
          "button",
          {
            class: active ? "toggle active" : "toggle",
            "data-role": `toggle-${info.category}`,
            title: info.description,
            onclick: () => session.toggleCategory(info.category),
          },
          info.category,
        ),
      );
    }
    container.append(toggles);

    const status = (label: string, role: string, onclick: () => void, active: boolean) =>
      el("button", { class: active ? "choice active" : "choice", "data-role": role, onclick }, label);

    container.append(
      el(
        "div",
        { class: "choices" },
        status("Normal (n)", "choose-normal", () => session.confirmNormal(), state.confirmedNormal),
        status("Skip (s)", "choose-skip", () => session.markStatus("skipped"), state.statusAction === "skipped"),
        status("Consensus", "choose-consensus", () => session.markStatus("consensus"), state.statusAction === "consensus"),
        status("Bad Scan", "choose-bad-scan", () => session.markStatus("bad_scan"), state.statusAction === "bad_scan"),
      ),
      el(
        "button",
        {
          class: "submit",
          "data-role": "submit",
          disabled: !session.canSubmit(),
          onclick: () => void session.submit(),
        },
        "Submit",
      ),
      el("p", { class: "count" }, `Submitted this session: ${state.submittedCount}`),
    );
  };

  session.onChange(draw);
  draw();
}
