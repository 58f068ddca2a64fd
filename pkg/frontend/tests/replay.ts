// Replays the exchanges captured by scripts/record-flow.py. The fake
// fetch refuses anything that was not recorded, so a test can only ever
// display numbers the real service produced.

import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type { FetchLike } from "../src/api.js";

export interface Exchange {
  method: string;
  path: string;
  request: unknown;
  status: number;
  response: unknown;
}

export interface Recording {
  setup: Exchange[];
  session: Exchange[];
  errors: Exchange[];
}

// vitest runs with the package root as cwd
export function loadRecording(): Recording {
  const raw = readFileSync(resolve("fixtures/recorded-flow.json"), "utf8");
  return JSON.parse(raw) as Recording;
}

/** JSON with object keys sorted, so key order never affects matching. */
export function canonical(value: unknown): string {
  if (value === null || typeof value !== "object") return JSON.stringify(value);
  if (Array.isArray(value)) return `[${value.map(canonical).join(",")}]`;
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${canonical(v)}`);
  return `{${entries.join(",")}}`;
}

function keyOf(method: string, path: string, body: unknown): string {
  return `${method} ${path} ${canonical(body ?? null)}`;
}

export class ReplayServer {
  private readonly queues = new Map<string, Exchange[]>();
  readonly served: Exchange[] = [];

  constructor(private readonly exchanges: Exchange[]) {
    for (const ex of exchanges) {
      const key = keyOf(ex.method, ex.path, ex.request);
      const queue = this.queues.get(key);
      if (queue) queue.push(ex);
      else this.queues.set(key, [ex]);
    }
  }

  /** Looks a recorded response up without consuming it, for assertions. */
  recorded(method: string, path: string, body: unknown = null): unknown {
    const key = keyOf(method, path, body);
    const match = this.exchanges.find((ex) => keyOf(ex.method, ex.path, ex.request) === key);
    if (!match) throw new Error(`nothing recorded for ${key}`);
    return match.response;
  }

  // Repeated identical calls replay in order; the last response sticks
  // so an idempotent call (clearing the selection twice) keeps working.
  fetch: FetchLike = async (url, init) => {
    const path = url.startsWith("/") ? url : new URL(url).pathname;
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
    const key = keyOf(method, path, body);

    const queue = this.queues.get(key);
    if (!queue || queue.length === 0) {
      throw new Error(`no recorded exchange for ${key}`);
    }
    const ex = queue.length > 1 ? queue.shift()! : queue[0]!;
    this.served.push(ex);
    return new Response(JSON.stringify(ex.response), {
      status: ex.status,
      headers: { "content-type": "application/json" },
    });
  };
}
