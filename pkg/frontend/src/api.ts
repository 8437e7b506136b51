// Typed client for the archive's HTTP endpoints. Every request the app
// makes goes through here, gets logged, and carries the bearer token when
// one has been entered.

import type {
  PluginManifest,
  SearchResponse,
  TaskSnapshot,
  WebUiDescriptor,
} from "./types.js";

export interface RequestLogEntry {
  method: string;
  path: string;
  status: number;
}

export class Unauthorized extends Error {
  constructor() {
    super("authentication required");
  }
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public position?: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  token: string | null = null;
  readonly log: RequestLogEntry[] = [];
  onUnauthorized: (() => void) | null = null;

  constructor(private base: string = "") {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const rsp = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    this.log.push({ method, path, status: rsp.status });
    if (rsp.status === 401) {
      this.onUnauthorized?.();
      throw new Unauthorized();
    }
    return rsp;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const rsp = await this.request(method, path, body);
    const payload = await rsp.json();
    if (!rsp.ok) {
      throw new ApiError(rsp.status, payload.error ?? rsp.statusText, payload.position);
    }
    return payload as T;
  }

  search(query: string): Promise<SearchResponse> {
    return this.json("GET", `/search?query=${encodeURIComponent(query)}`);
  }

  async indexUri(uri: string): Promise<string> {
    const body = await this.json<{ task_id: string }>(
      "POST", `/management/index?uri=${encodeURIComponent(uri)}`);
    return body.task_id;
  }

  unindexUri(uri: string): Promise<unknown> {
    return this.json("POST", `/management/unindex?uri=${encodeURIComponent(uri)}`);
  }

  async tasks(): Promise<TaskSnapshot[]> {
    const body = await this.json<{ tasks: TaskSnapshot[] }>("GET", "/management/tasks");
    return body.tasks;
  }

  async plugins(): Promise<PluginManifest[]> {
    const body = await this.json<{ plugins: PluginManifest[] }>("GET", "/management/plugins");
    return body.plugins;
  }

  setPluginEnabled(name: string, enabled: boolean): Promise<unknown> {
    return this.json("POST", "/management/plugins", { name, enabled });
  }

  async webuiDescriptors(slotId?: string): Promise<WebUiDescriptor[]> {
    const path = slotId ? `/webui?slot-id=${encodeURIComponent(slotId)}` : "/webui";
    const body = await this.json<{ plugins: WebUiDescriptor[] }>("GET", path);
    return body.plugins;
  }

  async webuiModuleSource(name: string, moduleFile: string): Promise<string> {
    const rsp = await this.request(
      "GET", `/webui/${encodeURIComponent(name)}/${encodeURIComponent(moduleFile)}`);
    if (!rsp.ok) throw new ApiError(rsp.status, `cannot load module for ${name}`);
    return rsp.text();
  }
}
