// @vitest-environment jsdom
/**
 * Scripted browser session against a live service instance.
 *
 * Spawns the Python service on a scratch corpus, renders the real screens
 * into a DOM, drives them by clicking the same controls an annotator would,
 * and checks the resulting event log payloads field-for-field: one report
 * labelled normal on the binary screen, one granular dual-label, one sent to
 * consensus and resolved through the queue.
 */
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderBinaryScreen } from "../src/binaryScreen.js";
import { ConsensusQueue } from "../src/consensusQueue.js";
import { renderGranularScreen } from "../src/granularScreen.js";
import { AnnotationSession } from "../src/session.js";
import { CATEGORIES } from "./fakes.js";

const PORT = 8900 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

const REPORTS = [
  {
    report_id: "e2e-a",
    clinical_information: "Chronic headache.",
    report_text: "Normal appearances of the brain. No acute infarct or haemorrhage.",
  },
  {
    report_id: "e2e-b",
    clinical_information: "Tumour follow-up.",
    report_text: "Appearances following tumour debulking with a residual enhancing component.",
  },
  {
    report_id: "e2e-c",
    clinical_information: "Pituitary follow-up.",
    report_text: "Previous transsphenoidal resection. Early post-operative assessment is difficult.",
  },
];

let service: ChildProcess | null = null;
let workDir = "";

function categoriesWith(positive: string[]): Record<string, number> {
  return Object.fromEntries(CATEGORIES.map((c) => [c, positive.includes(c) ? 1 : 0]));
}

function click(root: HTMLElement, name: string): void {
  const node = root.querySelector(`[data-role="${name}"]`) as HTMLElement | null;
  if (!node) throw new Error(`missing element with data-role=${name}`);
  node.click();
}

async function until(check: () => boolean, what: string, timeoutMs = 10_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error(`timed out waiting for ${what}`);
}

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service did not become healthy in time");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "neurolabel-e2e-"));
  const corpusPath = join(workDir, "corpus.jsonl");
  writeFileSync(corpusPath, REPORTS.map((r) => JSON.stringify(r)).join("\n") + "\n");
  const configPath = join(workDir, "config.json");
  writeFileSync(
    configPath,
    JSON.stringify({ corpus: corpusPath, event_log: join(workDir, "events.jsonl"), port: PORT }),
  );
  service = spawn("python3", ["-m", "neurolabel.cli", "serve", "--config", configPath], {
    stdio: "ignore",
  });
  await waitForHealth();
}, 60_000);

afterAll(() => {
  service?.kill("SIGTERM");
});

describe("scripted browser session against the live service", () => {
  it("labels three reports and the event log matches field-for-field", async () => {
    const api = new ApiClient(BASE);
    const annotator = "scripted";

    // --- binary screen: the first report is normal --------------------------
    const binaryRoot = document.createElement("div");
    document.body.append(binaryRoot);
    const coarse = new AnnotationSession(api, annotator, "coarse", CATEGORIES);
    renderBinaryScreen(binaryRoot, coarse);
    await coarse.start();
    await until(() => coarse.state.report?.report_id === "e2e-a", "first coarse report");
    expect(binaryRoot.textContent).toContain("Chronic headache.");

    click(binaryRoot, "choose-normal");
    click(binaryRoot, "submit");
    await until(() => coarse.state.submittedCount === 1, "binary submit");

    // --- granular screen: skip, dual-label, send to consensus ---------------
    const granularRoot = document.createElement("div");
    document.body.append(granularRoot);
    const granular = new AnnotationSession(api, annotator, "granular", CATEGORIES);
    const categoryInfos = await api.categories();
    renderGranularScreen(granularRoot, granular, categoryInfos);
    await granular.start();
    await until(() => granular.state.report?.report_id === "e2e-a", "first granular report");

    click(granularRoot, "choose-skip");
    click(granularRoot, "submit");
    await until(() => granular.state.report?.report_id === "e2e-b", "second granular report");

    click(granularRoot, "overlay-fetch");
    await until(() => granular.state.overlay !== null, "engine overlay");
    expect(granularRoot.querySelector("mark")).toBeTruthy();
    click(granularRoot, "overlay-accept");
    expect(granular.state.selected).toEqual(new Set(["mass", "damage"]));
    click(granularRoot, "submit");
    await until(() => granular.state.report?.report_id === "e2e-c", "third granular report");

    click(granularRoot, "choose-consensus");
    click(granularRoot, "submit");
    await until(() => granular.state.phase === "exhausted", "granular queue exhausted");

    // --- consensus queue: resolve the flagged report -------------------------
    const queueRoot = document.createElement("div");
    document.body.append(queueRoot);
    const queue = new ConsensusQueue(api, queueRoot, CATEGORIES, ["scripted", "second"]);
    await queue.refresh();
    expect(queue.state.tasks.map((t) => t.task_id)).toEqual(["e2e-c:granular"]);
    click(queueRoot, "resolve-toggle-damage");
    click(queueRoot, "resolve-submit");
    await until(() => queue.state.tasks.length === 0, "queue drained");

    const finals = await api.finals("granular");
    const final = finals.find((f) => f.report_id === "e2e-c");
    expect(final?.provenance).toBe("consensus_meeting");
    expect(final?.categories["damage"]).toBe(1);

    // --- the event log, field for field --------------------------------------
    const lines = readFileSync(join(workDir, "events.jsonl"), "utf-8")
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line) as Record<string, unknown>);

    const expected = [
      {
        type: "annotation",
        report_id: "e2e-a",
        annotator_id: "scripted",
        task_kind: "coarse",
        payload: {
          report_id: "e2e-a",
          binary_abnormal: 0,
          categories: categoriesWith([]),
          status: "labelled",
          source: "scripted",
        },
      },
      {
        type: "annotation",
        report_id: "e2e-a",
        annotator_id: "scripted",
        task_kind: "granular",
        payload: {
          report_id: "e2e-a",
          binary_abnormal: 0,
          categories: categoriesWith([]),
          status: "skipped",
          source: "scripted",
        },
      },
      {
        type: "annotation",
        report_id: "e2e-b",
        annotator_id: "scripted",
        task_kind: "granular",
        payload: {
          report_id: "e2e-b",
          binary_abnormal: 1,
          categories: categoriesWith(["mass", "damage"]),
          status: "labelled",
          source: "scripted",
        },
      },
      {
        type: "annotation",
        report_id: "e2e-c",
        annotator_id: "scripted",
        task_kind: "granular",
        payload: {
          report_id: "e2e-c",
          binary_abnormal: 0,
          categories: categoriesWith([]),
          status: "consensus",
          source: "scripted",
        },
      },
      {
        type: "resolution",
        report_id: "e2e-c",
        task_kind: "granular",
        resolvers: ["scripted", "second"],
        payload: {
          report_id: "e2e-c",
          binary_abnormal: 1,
          categories: categoriesWith(["damage"]),
          status: "labelled",
          source: "consensus",
        },
      },
    ];

    expect(lines).toHaveLength(expected.length);
    for (let i = 0; i < expected.length; i++) {
      const got = lines[i]!;
      const want = expected[i]!;
      for (const [key, value] of Object.entries(want)) {
        expect(got[key], `record ${i} field ${key}`).toEqual(value);
      }
      expect(got["event_id"], `record ${i} has an event id`).toBeTruthy();
    }
  }, 60_000);
});
