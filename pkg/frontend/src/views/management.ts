// Management view: indexing form with live task progress, the plugin
// table with enable/disable toggles, and the settings plugin slot.

import { Unauthorized, type ApiClient } from "../api.js";
import type { TaskSnapshot } from "../types.js";
import type { WebCore } from "../webcore.js";

const POLL_INTERVAL_MS = 1000;

export class ManagementView {
  readonly element: HTMLElement;
  private taskList: HTMLElement;
  private pluginTable: HTMLElement;
  private feedback: HTMLElement;
  private settingsHost: HTMLElement;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private settingsRendered = false;

  constructor(private api: ApiClient, private webcore: WebCore) {
    this.element = document.createElement("section");
    this.element.className = "view management-view";

    const form = document.createElement("form");
    form.className = "index-form";
    const input = document.createElement("input");
    input.placeholder = "file:///data/incoming";
    input.className = "index-uri";
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Index";
    form.append(input, submit);
    this.feedback = document.createElement("p");
    this.feedback.className = "management-message";
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitIndex(input.value.trim());
    });

    const tasksHeading = document.createElement("h2");
    tasksHeading.textContent = "Tasks";
    this.taskList = document.createElement("ul");
    this.taskList.className = "task-list";

    const pluginsHeading = document.createElement("h2");
    pluginsHeading.textContent = "Plugins";
    this.pluginTable = document.createElement("table");
    this.pluginTable.className = "plugin-table";

    const settingsHeading = document.createElement("h2");
    settingsHeading.textContent = "Plugin panes";
    this.settingsHost = document.createElement("div");
    this.settingsHost.className = "settings-host";

    this.element.append(form, this.feedback, tasksHeading, this.taskList,
                        pluginsHeading, this.pluginTable,
                        settingsHeading, this.settingsHost);
  }

  /** Called when the view becomes visible. */
  async activate(): Promise<void> {
    try {
      await Promise.all([this.refreshTasks(), this.refreshPlugins()]);
    } catch (err) {
      if (err instanceof Unauthorized) return;  // the token prompt is up now
      throw err;
    }
    if (!this.settingsRendered) {
      this.settingsRendered = true;
      await this.webcore.renderSlot(this.settingsHost, "settings");
    }
  }

  deactivate(): void {
    if (this.pollTimer !== null) {
      clearTimeout(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private async submitIndex(uri: string): Promise<void> {
    if (!uri) return;
    try {
      const taskId = await this.api.indexUri(uri);
      this.feedback.textContent = `indexing started: task ${taskId}`;
      this.feedback.classList.remove("error");
      await this.refreshTasks();
    } catch (err) {
      this.feedback.textContent = err instanceof Error ? err.message : String(err);
      this.feedback.classList.add("error");
    }
  }

  async refreshTasks(): Promise<void> {
    const tasks = await this.api.tasks();
    this.renderTasks(tasks);
    const active = tasks.some((t) => t.state === "queued" || t.state === "running");
    if (this.pollTimer !== null) clearTimeout(this.pollTimer);
    this.pollTimer = active
      ? setTimeout(() => void this.refreshTasks().catch(() => undefined),
                   POLL_INTERVAL_MS)
      : null;
  }

  private renderTasks(tasks: TaskSnapshot[]): void {
    this.taskList.textContent = "";
    if (!tasks.length) {
      const empty = document.createElement("li");
      empty.textContent = "no tasks yet";
      this.taskList.appendChild(empty);
      return;
    }
    for (const task of tasks) {
      const item = document.createElement("li");
      item.className = `task task-${task.state}`;
      item.dataset.taskId = task.id;
      const bar = document.createElement("progress");
      bar.max = 1;
      bar.value = task.progress;
      const label = document.createElement("span");
      label.textContent = task.report
        ? ` ${task.state}: ${task.report.files_indexed}/${task.report.files_seen} indexed,` +
          ` ${task.report.errors.length} error(s)`
        : ` ${task.state}`;
      item.append(bar, label);
      this.taskList.appendChild(item);
    }
  }

  async refreshPlugins(): Promise<void> {
    const plugins = await this.api.plugins();
    this.pluginTable.textContent = "";
    const head = document.createElement("tr");
    for (const title of ["Plugin", "Kind", "Set", "Enabled"]) {
      const th = document.createElement("th");
      th.textContent = title;
      head.appendChild(th);
    }
    this.pluginTable.appendChild(head);
    for (const plugin of plugins) {
      const row = document.createElement("tr");
      row.dataset.plugin = plugin.name;
      for (const text of [plugin.name, plugin.kind, plugin.set]) {
        const td = document.createElement("td");
        td.textContent = text;
        row.appendChild(td);
      }
      const td = document.createElement("td");
      const toggle = document.createElement("input");
      toggle.type = "checkbox";
      toggle.checked = plugin.enabled;
      toggle.addEventListener("change", () => {
        void this.toggle(plugin.name, toggle.checked, toggle);
      });
      td.appendChild(toggle);
      row.appendChild(td);
      this.pluginTable.appendChild(row);
    }
  }

  private async toggle(name: string, enabled: boolean,
                       box: HTMLInputElement): Promise<void> {
    try {
      await this.api.setPluginEnabled(name, enabled);
      this.feedback.textContent = `${name} ${enabled ? "enabled" : "disabled"}`;
      this.feedback.classList.remove("error");
    } catch (err) {
      box.checked = !enabled;  // revert the failed flip
      this.feedback.textContent = err instanceof Error ? err.message : String(err);
      this.feedback.classList.add("error");
    }
  }
}
