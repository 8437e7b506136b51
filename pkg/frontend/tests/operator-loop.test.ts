// Operator loop against the real archive: search, toggle the indexer off
// through the management view, store a new instance over DIMSE, and
// re-search to confirm nothing new shows up. Everything the app did must
// have gone through the documented endpoints (request-log assertion).

import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { App } from "../src/app.js";
import { ApiClient } from "../src/api.js";
import {
  patchFetchBase,
  sleep,
  startServer,
  storeInstance,
  waitForHits,
  type ServerHandle,
} from "./helpers.js";

let server: ServerHandle;
let restoreFetch: () => void;

beforeAll(async () => {
  server = await startServer();
  restoreFetch = patchFetchBase(server.base);
  await storeInstance(server, "55.1.1.1", "Loop^One");
  await waitForHits(server.base, "PatientName:Loop*", 1);
});

afterAll(async () => {
  restoreFetch();
  await server.stop();
});

const DOCUMENTED = [
  /^\/search\?query=/,
  /^\/management\/index\?uri=/,
  /^\/management\/unindex\?uri=/,
  /^\/management\/tasks$/,
  /^\/management\/plugins$/,
  /^\/webui(\?slot-id=[a-z-]+)?$/,
  /^\/webui\/[^/]+\/[^/]+$/,
  /^\/dicomweb\/studies(\?.*)?$/,
  /^\/dicomweb\/studies\/[^/]+\/series\/[^/]+\/instances\/[^/]+$/,
];

describe("operator loop", () => {
  test("toggling the indexer off stops new instances from appearing", async () => {
    const api = new ApiClient(server.base);
    const app = new App(api);
    document.body.appendChild(app.element);
    await app.start();

    // 1. search finds the seeded instance
    app.search.query = "PatientName:Loop*";
    await app.search.run();
    expect(app.element.querySelectorAll(".instance-row")).toHaveLength(1);

    // 2. management view: flip meta-index off through the table
    app.show("management");
    await app.management.activate();
    const row = app.element.querySelector('tr[data-plugin="meta-index"]');
    expect(row).not.toBeNull();
    const toggle = row!.querySelector('input[type="checkbox"]') as HTMLInputElement;
    expect(toggle.checked).toBe(true);
    toggle.checked = false;
    toggle.dispatchEvent(new Event("change"));
    await waitFor(() => api.log.some(
      (entry) => entry.method === "POST"
        && entry.path === "/management/plugins" && entry.status === 200));
    app.management.deactivate();

    // 3. store a new instance over the DICOM wire; C-STORE succeeds
    await storeInstance(server, "55.2.2.2", "Loop^Two");
    await sleep(500); // any (non-)indexing settles

    // 4. re-search: still only the original instance
    app.show("search");
    app.search.query = "PatientName:Loop*";
    await app.search.run();
    const rows = app.element.querySelectorAll(".instance-row");
    expect(rows).toHaveLength(1);
    expect(app.element.querySelector(".search-results")!.textContent)
      .not.toContain("55.2.2.2");

    // 5. the file itself reached storage (indexing, not storing, was off);
    //    flipping the indexer back on and re-indexing restores visibility
    toggle.checked = true;
    toggle.dispatchEvent(new Event("change"));
    await waitFor(() => api.log.filter(
      (entry) => entry.method === "POST" && entry.path === "/management/plugins"
        && entry.status === 200).length >= 2);
    const storedPath = `${server.workdir}/archive/55.2/55.2.2/55.2.2.2.dcm`;
    const taskId = await api.indexUri(`file://${storedPath}`);
    expect(taskId).toBeTruthy();
    await waitForHits(server.base, "PatientName:Loop*", 2);

    // 6. every request the app made hit a documented endpoint
    expect(api.log.length).toBeGreaterThan(5);
    for (const entry of api.log) {
      expect(DOCUMENTED.some((rx) => rx.test(entry.path)),
             `undocumented request: ${entry.method} ${entry.path}`).toBe(true);
    }
    document.body.textContent = "";
  });

  test("task list polls to completion after an index submission", async () => {
    const api = new ApiClient(server.base);
    const app = new App(api);
    document.body.appendChild(app.element);
    app.show("management");
    await app.management.activate();
    const input = app.element.querySelector(".index-uri") as HTMLInputElement;
    input.value = `file://${server.workdir}/archive`;
    const form = app.element.querySelector(".index-form") as HTMLFormElement;
    form.dispatchEvent(new Event("submit"));
    await waitFor(() => {
      const items = app.element.querySelectorAll(".task-list .task");
      return items.length > 0
        && [...items].every((el) => el.classList.contains("task-done"));
    }, 15000);
    const done = app.element.querySelectorAll(".task-list .task-done");
    expect(done.length).toBeGreaterThan(0);
    app.management.deactivate();
    document.body.textContent = "";
  });
});

async function waitFor(check: () => boolean, deadlineMs = 10000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < deadlineMs) {
    if (check()) return;
    await sleep(50);
  }
  throw new Error("condition never became true");
}
