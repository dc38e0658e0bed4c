// Test scaffolding: fixture loading and a canned-response fetch for the
// ApiClient, so components run against real engine payloads without a
// server.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(fixturesDir, name), "utf-8")) as T;
}

export interface Route {
  method: string;
  path: string;
  reply: () => unknown;
  status?: number;
}

/** FetchLike serving canned JSON; throws on anything unrouted. */
export function cannedFetch(routes: Route[]): FetchLike {
  return async (input: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const url = input.split("?")[0];
    const route = routes.find((r) => r.method === method && r.path === url);
    if (!route) {
      throw new Error(`no canned route for ${method} ${input}`);
    }
    const body = JSON.stringify(route.reply());
    return new Response(body, {
      status: route.status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  };
}
