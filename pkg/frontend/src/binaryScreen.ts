import { clear, el } from "./dom.js";
import type { AnnotationSession } from "./session.js";

/**
 * Binary labelling screen: clinical information above the report body,
 * Normal / Abnormal / Skip / Consensus / Bad Scan, and a submit button that
 * stays disabled until a choice exists. Keyboard: n / a / s.
 */
export function renderBinaryScreen(container: HTMLElement, session: AnnotationSession): void {
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
      el(
        "section",
        { class: "report", "data-role": "report-text" },
        el("h3", {}, `Report ${state.report.report_id}`),
        el("p", {}, state.report.report_text),
      ),
    );

    const choice = (label: string, active: boolean, onclick: () => void, role: string) =>
      el(
        "button",
        { class: active ? "choice active" : "choice", "data-role": role, onclick },
        label,
      );

    container.append(
      el(
        "div",
        { class: "choices" },
        choice("Normal (n)", state.binaryChoice === "normal", () => session.chooseBinary("normal"), "choose-normal"),
        choice("Abnormal (a)", state.binaryChoice === "abnormal", () => session.chooseBinary("abnormal"), "choose-abnormal"),
        choice("Skip (s)", state.statusAction === "skipped", () => session.markStatus("skipped"), "choose-skip"),
        choice("Consensus", state.statusAction === "consensus", () => session.markStatus("consensus"), "choose-consensus"),
        choice("Bad Scan", state.statusAction === "bad_scan", () => session.markStatus("bad_scan"), "choose-bad-scan"),
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
