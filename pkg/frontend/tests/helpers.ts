// Harness: boots the real archive server and speaks to it like a browser.

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, cpSync, mkdirSync, writeFileSync } from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

const HERE = path.dirname(fileURLToPath(import.meta.url));
export const REPO_ROOT = path.resolve(HERE, "..", "..");
export const SAMPLE_PLUGIN_DIR = path.resolve(HERE, "..", "plugins");

export interface ServerHandle {
  base: string;
  httpPort: number;
  dimsePort: number;
  workdir: string;
  webuiDir: string;
  proc: ChildProcess;
  stop(): Promise<void>;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address() as net.AddressInfo;
      srv.close(() => resolve(address.port));
    });
    srv.on("error", reject);
  });
}

async function waitForPort(port: number, proc: ChildProcess, deadlineMs = 15000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < deadlineMs) {
    if (proc.exitCode !== null) throw new Error(`server exited early (${proc.exitCode})`);
    const ok = await new Promise<boolean>((resolve) => {
      const sock = net.connect(port, "127.0.0.1");
      sock.once("connect", () => { sock.destroy(); resolve(true); });
      sock.once("error", () => resolve(false));
    });
    if (ok) return;
    await sleep(50);
  }
  throw new Error("server never became ready");
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function startServer(options: { token?: string } = {}): Promise<ServerHandle> {
  const workdir = mkdtempSync(path.join(os.tmpdir(), "minipacs-ui-"));
  const webuiDir = path.join(workdir, "webui");
  mkdirSync(webuiDir);
  const httpPort = await freePort();
  const dimsePort = await freePort();
  const configPath = path.join(workdir, "minipacs.json");
  writeFileSync(configPath, JSON.stringify({
    aetitle: "MINIPACS",
    dimse: { port: dimsePort },
    http: { port: httpPort, token: options.token ?? null },
    storage: { scheme: "file", root: path.join(workdir, "archive") },
    index: { path: path.join(workdir, "index.mpix") },
    plugins: [],
    webui: { dir: webuiDir },
  }));
  const proc = spawn("python3", ["-m", "minipacs.cli", "serve", "--config", configPath],
                     { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] });
  let stderr = "";
  proc.stderr?.on("data", (chunk) => { stderr += String(chunk); });
  try {
    await waitForPort(httpPort, proc);
    await waitForPort(dimsePort, proc);
  } catch (err) {
    proc.kill("SIGKILL");
    throw new Error(`${err}\nserver log:\n${stderr}`);
  }
  return {
    base: `http://127.0.0.1:${httpPort}`,
    httpPort,
    dimsePort,
    workdir,
    webuiDir,
    proc,
    stop: () =>
      new Promise<void>((resolve) => {
        proc.once("exit", () => resolve());
        proc.kill("SIGINT");
        setTimeout(() => { proc.kill("SIGKILL"); resolve(); }, 10000).unref();
      }),
  };
}

/** Copy one of the shipped sample plugin packages into the server's webui dir. */
export function installSamplePlugin(server: ServerHandle, name: string): void {
  cpSync(path.join(SAMPLE_PLUGIN_DIR, name), path.join(server.webuiDir, name),
         { recursive: true });
}

/** Write a plugin package from raw parts. */
export function installPlugin(server: ServerHandle, name: string, slotId: string,
                              moduleSource: string): void {
  const dir = path.join(server.webuiDir, name);
  mkdirSync(dir, { recursive: true });
  writeFileSync(path.join(dir, "package.json"), JSON.stringify({
    name, "slot-id": slotId, caption: name, "module-file": "module.js",
  }));
  writeFileSync(path.join(dir, "module.js"), moduleSource);
}

/** C-STORE one synthetic instance over the DIMSE port (real wire protocol). */
export async function storeInstance(server: ServerHandle, sopUid: string,
                                    patientName: string): Promise<void> {
  const script = path.join(HERE, "store_instance.py");
  const { stdout } = await execFileAsync(
    "python3", [script, String(server.dimsePort), sopUid, patientName],
    { cwd: REPO_ROOT });
  if (!stdout.includes("0x0000")) {
    throw new Error(`C-STORE failed: ${stdout}`);
  }
}

/**
 * Browsers resolve fetch("/x") against the page origin; node needs help.
 * Routes relative URLs at the archive under test.
 */
export function patchFetchBase(base: string): () => void {
  const original = globalThis.fetch;
  globalThis.fetch = ((input: any, init?: any) => {
    if (typeof input === "string" && input.startsWith("/")) {
      return original(base + input, init);
    }
    return original(input, init);
  }) as typeof fetch;
  return () => { globalThis.fetch = original; };
}

/** Poll until the archive's /search returns the expected hit count. */
export async function waitForHits(base: string, query: string, count: number,
                                  deadlineMs = 10000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < deadlineMs) {
    const rsp = await fetch(`${base}/search?query=${encodeURIComponent(query)}`);
    if (rsp.ok) {
      const body = await rsp.json();
      if (body.num_results === count) return;
    }
    await sleep(100);
  }
  throw new Error(`never reached ${count} hit(s) for ${query}`);
}
