// Application shell: sidebar (built-in views plus menu plugins), view
// switching, and the token prompt raised by any 401.

import { ApiClient } from "./api.js";
import { ManagementView } from "./views/management.js";
import { SearchView } from "./views/search.js";
import { WebCore } from "./webcore.js";

export class App {
  readonly element: HTMLElement;
  readonly api: ApiClient;
  readonly webcore: WebCore;
  readonly search: SearchView;
  readonly management: ManagementView;
  private main: HTMLElement;
  private menuHost: HTMLElement;
  private tokenPrompt: HTMLElement;
  private menuRendered = false;

  constructor(api?: ApiClient) {
    this.api = api ?? new ApiClient();
    this.webcore = new WebCore(this.api);
    this.search = new SearchView(this.api, this.webcore);
    this.management = new ManagementView(this.api, this.webcore);

    this.element = document.createElement("div");
    this.element.className = "app";

    const sidebar = document.createElement("nav");
    sidebar.className = "sidebar";
    const title = document.createElement("h1");
    title.textContent = "minipacs";
    sidebar.appendChild(title);
    const searchEntry = this.menuEntry("Search", () => this.show("search"));
    const managementEntry = this.menuEntry("Management", () => this.show("management"));
    this.menuHost = document.createElement("div");
    this.menuHost.className = "menu-plugins";
    sidebar.append(searchEntry, managementEntry, this.menuHost);

    this.main = document.createElement("main");
    this.main.className = "main";

    this.tokenPrompt = this.buildTokenPrompt();
    this.tokenPrompt.hidden = true;

    this.element.append(sidebar, this.main, this.tokenPrompt);
    this.api.onUnauthorized = () => {
      this.tokenPrompt.hidden = false;
    };
  }

  private menuEntry(caption: string, onClick: () => void): HTMLElement {
    const entry = document.createElement("button");
    entry.className = "menu-entry";
    entry.textContent = caption;
    entry.addEventListener("click", onClick);
    return entry;
  }

  private buildTokenPrompt(): HTMLElement {
    const overlay = document.createElement("div");
    overlay.className = "token-prompt";
    const box = document.createElement("form");
    const label = document.createElement("p");
    label.textContent = "This server requires an access token.";
    const input = document.createElement("input");
    input.type = "password";
    input.placeholder = "token";
    input.className = "token-input";
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Sign in";
    box.append(label, input, submit);
    box.addEventListener("submit", (event) => {
      event.preventDefault();
      this.api.token = input.value;
      this.tokenPrompt.hidden = true;
    });
    overlay.appendChild(box);
    return overlay;
  }

  /** Populate the sidebar with menu-slot plugins; safe to call once at boot. */
  async start(): Promise<void> {
    this.show("search");
    if (this.menuRendered) return;
    this.menuRendered = true;
    try {
      const descriptors = await this.webcore.descriptors("menu");
      for (const descriptor of descriptors) {
        const entry = this.menuEntry(descriptor.caption, () => {
          this.main.textContent = "";
          const host = document.createElement("section");
          host.className = "view menu-plugin-view";
          this.main.appendChild(host);
          void this.webcore.renderSlot(host, "menu");
        });
        entry.dataset.plugin = descriptor.name;
        this.menuHost.appendChild(entry);
      }
    } catch {
      // menu plugins are cosmetic; the app works without the listing
    }
  }

  show(view: "search" | "management"): void {
    this.management.deactivate();
    this.main.textContent = "";
    if (view === "search") {
      this.main.appendChild(this.search.element);
    } else {
      this.main.appendChild(this.management.element);
      void this.management.activate();
    }
  }
}
