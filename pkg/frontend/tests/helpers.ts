/**
 * Test helpers: recorded-fixture loading and a fake gateway that replays
 * canned responses while recording every round-trip.
 */

import fs from "node:fs";
import path from "node:path";
import type { FetchLike } from "../src/api";

// vitest runs from the frontend root; jsdom rewrites import.meta.url, so
// resolve fixtures relative to the working directory instead
export function fixture<T>(name: string): T {
  const file = path.resolve(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(fs.readFileSync(file, "utf-8")) as T;
}

export interface RecordedCall {
  method: string;
  url: string;
  body?: unknown;
}

interface Route {
  method: string;
  pattern: RegExp;
  status: number;
  body: unknown;
}

export class FakeGateway {
  calls: RecordedCall[] = [];
  private routes: Route[] = [];

  /** Register a route; the most recently registered match wins. */
  on(method: string, pattern: RegExp, status: number, body: unknown): this {
    this.routes.unshift({ method, pattern, status, body });
    return this;
  }

  clearCalls(): void {
    this.calls = [];
  }

  /** Drop all routes (recorded calls survive; clear those separately). */
  reset(): void {
    this.routes = [];
  }

  callsTo(pattern: RegExp): RecordedCall[] {
    return this.calls.filter((call) => pattern.test(call.url));
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    this.calls.push({
      method,
      url,
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    });
    const route = this.routes.find((r) => r.method === method && r.pattern.test(url));
    if (!route) {
      throw new Error(`unrouted request: ${method} ${url}`);
    }
    const payload = JSON.stringify(route.body);
    return {
      ok: route.status >= 200 && route.status < 300,
      status: route.status,
      json: async () => JSON.parse(payload),
    } as Response;
  };
}
