import { ApiClient } from "./api.js";
import { renderBinaryScreen } from "./binaryScreen.js";
import { ConsensusQueue } from "./consensusQueue.js";
import { clear, el } from "./dom.js";
import { renderProgress } from "./progress.js";
import { AnnotationSession } from "./session.js";
import { renderGranularScreen } from "./granularScreen.js";

/**
 * Application shell: asks for an annotator id, then offers the binary
 * screen, the granular screen, the consensus queue and the progress view as
 * tabs. One annotator per browser session; the server serialises everything
 * else.
 */
export async function startApp(root: HTMLElement, baseUrl = ""): Promise<void> {
  const api = new ApiClient(baseUrl);
  const categories = await api.categories();
  const categoryIds = categories.map((c) => c.category);

  const params = new URLSearchParams(window.location.search);
  const annotatorId = params.get("annotator") ?? "anonymous";

  const content = el("main", { class: "content" });
  const tabs = el("nav", { class: "tabs" });
  root.append(
    el("header", {}, el("h1", {}, "Report labelling"), el("p", {}, `Annotator: ${annotatorId}`)),
    tabs,
    content,
  );

  const keyTargets: AnnotationSession[] = [];
  document.addEventListener("keydown", (event) => {
    const active = keyTargets[keyTargets.length - 1];
    if (active && !(event.target instanceof HTMLInputElement)) {
      active.handleKey(event.key);
    }
  });

  const openBinary = async (): Promise<void> => {
    clear(content);
    const session = new AnnotationSession(api, annotatorId, "coarse", categoryIds);
    keyTargets.push(session);
    renderBinaryScreen(content, session);
    await session.start();
  };

  const openGranular = async (): Promise<void> => {
    clear(content);
    const session = new AnnotationSession(api, annotatorId, "granular", categoryIds);
    keyTargets.push(session);
    renderGranularScreen(content, session, categories);
    await session.start();
  };

  const openConsensus = async (): Promise<void> => {
    clear(content);
    const queue = new ConsensusQueue(api, content, categoryIds, [annotatorId]);
    await queue.refresh();
  };

  const openProgress = async (): Promise<void> => {
    clear(content);
    await renderProgress(content, api);
  };

  const tab = (label: string, open: () => Promise<void>, role: string) =>
    el("button", { class: "tab", "data-role": role, onclick: () => void open() }, label);

  tabs.append(
    tab("Binary", openBinary, "tab-binary"),
    tab("Granular", openGranular, "tab-granular"),
    tab("Consensus", openConsensus, "tab-consensus"),
    tab("Progress", openProgress, "tab-progress"),
  );

  await openBinary();
}
