/** In-memory stand-in for the northbound API, exposed as a FetchLike.
 * Mirrors the server's validation rules the tests rely on: 16-channel
 * physical slice capacity and atomic plan replacement. */

import type { FetchLike, PlanJson } from "../src/api.js";

const MAX_PHYSICAL_SLICES = 16;

export interface FakeState {
  plan: PlanJson;
  density: Record<string, { tier: string; percentile: number }>;
  putCount: number;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function validate(plan: PlanJson): { reason: string; detail: string } | null {
  if (plan.mode === "physical" && plan.slices.length > MAX_PHYSICAL_SLICES) {
    return {
      reason: "slice-capacity",
      detail: `${plan.slices.length} slices > ${MAX_PHYSICAL_SLICES}`,
    };
  }
  const seen = new Set<number>();
  for (const s of plan.slices) {
    for (const m of s.members) {
      if (seen.has(m)) {
        return { reason: "node-in-two-slices", detail: `node ${m}` };
      }
      seen.add(m);
    }
  }
  return null;
}

export function makeFakeServer(state: FakeState): FetchLike {
  return async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];

    if (method === "GET" && path === "/plan") {
      return jsonResponse(200, state.plan);
    }
    if (method === "PUT" && path === "/plan") {
      const plan = JSON.parse(String(init?.body)) as PlanJson;
      const error = validate(plan);
      if (error) {
        return jsonResponse(422, error);
      }
      state.plan = plan;
      state.putCount += 1;
      return jsonResponse(200, {
        plan,
        recomputed_slices: plan.slices.map((s) => s.id),
        channel_retunes: [],
      });
    }
    if (method === "GET" && path === "/density") {
      return jsonResponse(200, state.density);
    }
    if (method === "GET" && path === "/topology") {
      return jsonResponse(200, { comm_range: 10, nodes: [], edges: [] });
    }
    if (method === "GET" && path === "/codet/reports") {
      return jsonResponse(200, []);
    }
    if (method === "GET" && path === "/pdr") {
      return jsonResponse(200, {
        sent: 0, received: 0, pdr: null, undefined: true,
        per_slice: {}, drops: {},
      });
    }
    if (method === "GET" && path === "/sim/status") {
      return jsonResponse(200, { status: "idle" });
    }
    return jsonResponse(404, { reason: "not-found", detail: path });
  };
}

export function twoSlicePlan(): PlanJson {
  return {
    mode: "physical",
    default_slice: "B",
    slices: [
      { id: "A", members: [1, 2, 3], channel: 15, border_router: 98 },
      { id: "B", members: [4, 5, 6], channel: 26, border_router: 99 },
    ],
  };
}
