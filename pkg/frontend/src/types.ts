// Shapes of the archive's JSON responses.

export interface SearchHit {
  uri: string;
  score: number;
  fields: Record<string, string[]>;
}

export interface SearchResponse {
  results: SearchHit[];
  num_results: number;
  elapsed: number;
}

export interface TaskReport {
  files_seen: number;
  files_indexed: number;
  errors: { uri: string; message: string }[];
  elapsed_ms: number;
}

export interface TaskSnapshot {
  id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  report: TaskReport | null;
}

export interface PluginManifest {
  name: string;
  kind: string;
  enabled: boolean;
  set: string;
  settings: Record<string, string>;
}

export type SlotId = "menu" | "result-option" | "result-batch" | "settings";

export interface WebUiDescriptor {
  name: string;
  "slot-id": SlotId;
  caption: string;
  "module-file": string;
}

// Context handed to a plugin module's render() entry point. The payload
// depends on the slot: one result record for result-option, the visible
// result list for result-batch, nothing for menu/settings.
export interface SlotContext {
  slotId: SlotId;
  payload?: SearchHit | SearchHit[];
}

export interface UiPluginModule {
  render(mount: HTMLElement, context: SlotContext): void;
}
