// Web core behavior that needs no live server: caching, in-flight
// de-duplication, retry on network loss, and the 401 short-circuit.

import { describe, expect, test, vi } from "vitest";

import { ApiClient, Unauthorized } from "../src/api.js";
import { WebCore } from "../src/webcore.js";
import type { WebUiDescriptor } from "../src/types.js";

const DESCRIPTOR: WebUiDescriptor = {
  name: "one", "slot-id": "menu", caption: "One", "module-file": "module.js",
};

function stubApi(impl: () => Promise<WebUiDescriptor[]>): ApiClient {
  const api = new ApiClient("");
  api.webuiDescriptors = impl as ApiClient["webuiDescriptors"];
  return api;
}

describe("web core unit behavior", () => {
  test("descriptor lists are cached per session and de-duplicated in flight", async () => {
    const impl = vi.fn(async () => [DESCRIPTOR]);
    const core = new WebCore(stubApi(impl));
    const [a, b] = await Promise.all([core.descriptors("menu"), core.descriptors("menu")]);
    expect(a).toEqual([DESCRIPTOR]);
    expect(b).toEqual(a);
    await core.descriptors("menu");
    expect(impl).toHaveBeenCalledTimes(1);
    core.invalidate();
    await core.descriptors("menu");
    expect(impl).toHaveBeenCalledTimes(2);
  });

  test("network failures retry with backoff before succeeding", async () => {
    vi.useFakeTimers();
    try {
      let calls = 0;
      const impl = vi.fn(async () => {
        calls += 1;
        if (calls < 3) throw new TypeError("fetch failed");
        return [DESCRIPTOR];
      });
      const core = new WebCore(stubApi(impl));
      const pending = core.descriptors("menu");
      await vi.runAllTimersAsync();
      expect(await pending).toEqual([DESCRIPTOR]);
      expect(impl).toHaveBeenCalledTimes(3);
    } finally {
      vi.useRealTimers();
    }
  });

  test("a 401 aborts immediately instead of retrying", async () => {
    const impl = vi.fn(async () => { throw new Unauthorized(); });
    const core = new WebCore(stubApi(impl));
    await expect(core.descriptors("menu")).rejects.toBeInstanceOf(Unauthorized);
    expect(impl).toHaveBeenCalledTimes(1);
    // the failure was not cached; a later call tries again
    impl.mockImplementation(async () => [DESCRIPTOR]);
    expect(await core.descriptors("menu")).toEqual([DESCRIPTOR]);
  });
});
