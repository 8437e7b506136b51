// Web core: fetches the installed UI plugin list, loads each plugin's
// module at runtime, and renders it into its slot. A broken plugin gets
// an error badge in its own container and never takes the app down.

import { Unauthorized, type ApiClient } from "./api.js";
import type { SlotContext, SlotId, UiPluginModule, WebUiDescriptor } from "./types.js";

const RETRY_DELAYS_MS = [250, 1000, 3000];

export class WebCore {
  private descriptorCache = new Map<string, Promise<WebUiDescriptor[]>>();
  private moduleCache = new Map<string, Promise<UiPluginModule>>();

  constructor(private api: ApiClient) {}

  /**
   * Descriptor list for a slot; cached per session with in-flight
   * de-duplication and retried with backoff on network loss. A failed
   * round leaves the cache empty so the next call tries again.
   */
  descriptors(slotId?: SlotId): Promise<WebUiDescriptor[]> {
    const key = slotId ?? "*";
    let pending = this.descriptorCache.get(key);
    if (!pending) {
      pending = this.fetchDescriptors(slotId).catch((err) => {
        this.descriptorCache.delete(key);
        throw err;
      });
      this.descriptorCache.set(key, pending);
    }
    return pending;
  }

  private async fetchDescriptors(slotId?: SlotId): Promise<WebUiDescriptor[]> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= RETRY_DELAYS_MS.length; attempt++) {
      try {
        return await this.api.webuiDescriptors(slotId);
      } catch (err) {
        lastError = err;
        if (err instanceof Unauthorized) throw err;  // a login prompt, not a retry
        const delay = RETRY_DELAYS_MS[attempt];
        if (delay === undefined) break;
        await new Promise((resolve) => setTimeout(resolve, delay));
      }
    }
    throw lastError;
  }

  invalidate(): void {
    this.descriptorCache.clear();
  }

  /** Load a plugin module once per session; later calls share the promise. */
  loadModule(descriptor: WebUiDescriptor): Promise<UiPluginModule> {
    let loading = this.moduleCache.get(descriptor.name);
    if (!loading) {
      loading = this.fetchAndImport(descriptor);
      this.moduleCache.set(descriptor.name, loading);
    }
    return loading;
  }

  private async fetchAndImport(descriptor: WebUiDescriptor): Promise<UiPluginModule> {
    const source = await this.api.webuiModuleSource(
      descriptor.name, descriptor["module-file"]);
    const url = "data:text/javascript;base64," + toBase64(source);
    const mod = await import(/* @vite-ignore */ url);
    if (typeof mod.render !== "function") {
      throw new Error(`plugin ${descriptor.name} exports no render()`);
    }
    return mod as UiPluginModule;
  }

  /**
   * Render every plugin of a slot into the given host. Each plugin gets
   * its own child container; a load or render failure turns only that
   * container into an error badge.
   */
  async renderSlot(host: HTMLElement, slotId: SlotId,
                   payload?: SlotContext["payload"]): Promise<HTMLElement[]> {
    const descriptors = await this.descriptors(slotId);
    const containers: HTMLElement[] = [];
    for (const descriptor of descriptors) {
      const container = document.createElement("div");
      container.className = "plugin-slot";
      container.dataset.plugin = descriptor.name;
      container.dataset.slotId = slotId;
      host.appendChild(container);
      containers.push(container);
      try {
        const mod = await this.loadModule(descriptor);
        mod.render(container, { slotId, payload });
      } catch (err) {
        container.textContent = "";
        const badge = document.createElement("span");
        badge.className = "plugin-error";
        badge.textContent = `plugin "${descriptor.name}" failed: ${
          err instanceof Error ? err.message : String(err)}`;
        container.appendChild(badge);
      }
    }
    return containers;
  }
}

function toBase64(text: string): string {
  const bytes = new TextEncoder().encode(text);
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  return btoa(binary);
}
