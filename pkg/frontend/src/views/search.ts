// Search view: query box, hierarchical results, and the two result slot
// surfaces (per-row result-option column behind "Advanced Options", and
// result-batch plugins under the list).

import { ApiError, type ApiClient } from "../api.js";
import type { SearchHit } from "../types.js";
import type { WebCore } from "../webcore.js";

function firstValue(hit: SearchHit, keyword: string): string {
  const values = hit.fields[keyword];
  return values && values.length ? values[0] : "";
}

interface StudyGroup {
  studyUid: string;
  series: Map<string, SearchHit[]>;
}

interface PatientGroup {
  key: string;
  label: string;
  studies: Map<string, StudyGroup>;
}

function groupHits(hits: SearchHit[]): PatientGroup[] {
  const patients = new Map<string, PatientGroup>();
  for (const hit of hits) {
    const patientId = firstValue(hit, "PatientID") || "(no patient id)";
    const name = firstValue(hit, "PatientName");
    const key = patientId;
    let patient = patients.get(key);
    if (!patient) {
      patient = { key, label: name ? `${name} (${patientId})` : patientId,
                  studies: new Map() };
      patients.set(key, patient);
    }
    const studyUid = firstValue(hit, "StudyInstanceUID") || "(no study)";
    let study = patient.studies.get(studyUid);
    if (!study) {
      study = { studyUid, series: new Map() };
      patient.studies.set(studyUid, study);
    }
    const seriesUid = firstValue(hit, "SeriesInstanceUID") || "(no series)";
    const instances = study.series.get(seriesUid) ?? [];
    instances.push(hit);
    study.series.set(seriesUid, instances);
  }
  return [...patients.values()].sort((a, b) => a.key.localeCompare(b.key));
}

export class SearchView {
  readonly element: HTMLElement;
  private input: HTMLInputElement;
  private message: HTMLElement;
  private resultsHost: HTMLElement;
  private batchHost: HTMLElement;
  private advanced = false;
  private lastHits: SearchHit[] = [];

  constructor(private api: ApiClient, private webcore: WebCore) {
    this.element = document.createElement("section");
    this.element.className = "view search-view";

    const form = document.createElement("form");
    form.className = "search-form";
    this.input = document.createElement("input");
    this.input.type = "search";
    this.input.placeholder = 'e.g. PatientName:Do* AND Modality:CT';
    this.input.className = "search-input";
    const button = document.createElement("button");
    button.type = "submit";
    button.textContent = "Search";
    const advanced = document.createElement("label");
    advanced.className = "advanced-toggle";
    const advancedBox = document.createElement("input");
    advancedBox.type = "checkbox";
    advanced.append(advancedBox, document.createTextNode(" Advanced Options"));
    form.append(this.input, button, advanced);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.run();
    });
    advancedBox.addEventListener("change", () => {
      this.advanced = advancedBox.checked;
      void this.renderResults();
    });

    this.message = document.createElement("p");
    this.message.className = "search-message";
    this.resultsHost = document.createElement("div");
    this.resultsHost.className = "search-results";
    this.batchHost = document.createElement("div");
    this.batchHost.className = "result-batch-host";
    this.element.append(form, this.message, this.resultsHost, this.batchHost);
  }

  get query(): string {
    return this.input.value;
  }

  set query(text: string) {
    this.input.value = text;
  }

  async run(): Promise<void> {
    const text = this.input.value.trim();
    if (!text) return;
    try {
      const response = await this.api.search(text);
      this.lastHits = response.results;
      this.message.textContent =
        `${response.num_results} result(s) in ${response.elapsed.toFixed(1)} ms`;
      this.message.classList.remove("error");
      await this.renderResults();
    } catch (err) {
      if (err instanceof ApiError) {
        // keep the previous rows; surface the parser's message inline
        this.message.textContent = err.position !== undefined
          ? `${err.message} (position ${err.position})`
          : err.message;
        this.message.classList.add("error");
        return;
      }
      throw err;
    }
  }

  private async renderResults(): Promise<void> {
    this.resultsHost.textContent = "";
    this.batchHost.textContent = "";
    if (!this.lastHits.length) return;

    const optionPlugins = this.advanced
      ? await this.webcore.descriptors("result-option")
      : [];
    const showOptions = optionPlugins.length > 0;

    for (const patient of groupHits(this.lastHits)) {
      const patientEl = document.createElement("details");
      patientEl.open = true;
      patientEl.className = "patient-group";
      const patientLabel = document.createElement("summary");
      patientLabel.textContent = patient.label;
      patientEl.appendChild(patientLabel);
      for (const study of patient.studies.values()) {
        const studyEl = document.createElement("details");
        studyEl.open = true;
        studyEl.className = "study-group";
        const studyLabel = document.createElement("summary");
        studyLabel.textContent = `Study ${study.studyUid}`;
        studyEl.appendChild(studyLabel);
        for (const [seriesUid, instances] of study.series) {
          const table = document.createElement("table");
          table.className = "series-table";
          table.dataset.seriesUid = seriesUid;
          const caption = document.createElement("caption");
          caption.textContent =
            `Series ${seriesUid} (${instances.length} instance(s))`;
          table.appendChild(caption);
          for (const hit of instances) {
            const row = document.createElement("tr");
            row.className = "instance-row";
            const cells = [
              firstValue(hit, "SOPInstanceUID"),
              firstValue(hit, "Modality"),
              firstValue(hit, "StudyDate"),
              hit.uri,
            ];
            for (const text of cells) {
              const td = document.createElement("td");
              td.textContent = text;
              row.appendChild(td);
            }
            if (showOptions) {
              const td = document.createElement("td");
              td.className = "result-option-cell";
              row.appendChild(td);
              void this.webcore.renderSlot(td, "result-option", hit);
            }
            table.appendChild(row);
          }
          studyEl.appendChild(table);
        }
        patientEl.appendChild(studyEl);
      }
      this.resultsHost.appendChild(patientEl);
    }
    await this.webcore.renderSlot(this.batchHost, "result-batch", this.lastHits);
  }
}
