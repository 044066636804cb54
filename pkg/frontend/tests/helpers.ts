/** Shared test helpers: fixture loading and a scriptable fetch stub. */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { vi } from "vitest";

const here = dirname(fileURLToPath(import.meta.url));

/** Responses captured from the real platform API (bit-exact payloads). */
export const fixtures = JSON.parse(readFileSync(join(here, "fixtures.json"), "utf-8"));

export type RouteTable = Record<string, () => { status: number; body: unknown }>;

/**
 * Install a fetch stub routed by "METHOD path". Returns the call log so
 * tests can assert on request counts and headers.
 */
export function stubFetch(routes: RouteTable) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const impl = async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    calls.push({ url, init });
    const key = `${method} ${path}`;
    const exact = routes[key];
    const route =
      exact ??
      Object.entries(routes).find(([pattern]) => {
        if (!pattern.endsWith("*")) return false;
        const [m, p] = pattern.split(" ", 2);
        return m === method && path.startsWith(p.slice(0, -1));
      })?.[1];
    if (!route) {
      return new Response(JSON.stringify({ error: "NotFound" }), { status: 404 });
    }
    const { status, body } = route();
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  vi.stubGlobal("fetch", vi.fn(impl));
  return calls;
}

export function flushPromises(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
