/** Pure view-model helpers: the rendering state for one snapshot epoch.
 *
 * Tier colors come verbatim from the API's density map — the client never
 * reclassifies a node from its degree.
 */

import type {
  DensityMap,
  NodeInfo,
  PlanJson,
  Snapshot,
} from "./api.js";

export const RAG_COLORS: Record<string, string> = {
  green: "#2e9e4f",
  yellow: "#e0c020",
  amber: "#e08020",
  red: "#d03030",
};

export const ROUTER_COLOR = "#3050c0";
export const UNKNOWN_COLOR = "#909090";

/** Fill color for a node: routers get the infrastructure color, sensors
 * get exactly the tier the API reported. */
export function nodeColor(node: NodeInfo, density: DensityMap): string {
  if (node.role === "border-router") {
    return ROUTER_COLOR;
  }
  const entry = density[String(node.id)];
  if (!entry) {
    return UNKNOWN_COLOR;
  }
  return RAG_COLORS[entry.tier] ?? UNKNOWN_COLOR;
}

export function sliceOf(plan: PlanJson, nodeId: number): string | null {
  for (const s of plan.slices) {
    if (s.members.includes(nodeId) || s.border_router === nodeId) {
      return s.id;
    }
  }
  return null;
}

export function channelLabel(plan: PlanJson, sliceId: string): string {
  const s = plan.slices.find((x) => x.id === sliceId);
  if (!s) return "";
  return s.channel === null ? "shared" : `ch. ${s.channel}`;
}

export interface HoverInfo {
  id: number;
  role: string;
  degree: number;
  slice: string | null;
  channel: string;
  tier: string | null;
}

export function hoverInfo(snapshot: Snapshot, nodeId: number): HoverInfo {
  const degree = snapshot.topology.edges.filter(
    ([a, b]) => a === nodeId || b === nodeId,
  ).length;
  const slice = sliceOf(snapshot.plan, nodeId);
  const node = snapshot.topology.nodes.find((n) => n.id === nodeId);
  return {
    id: nodeId,
    role: node?.role ?? "unknown",
    degree,
    slice,
    channel: slice ? channelLabel(snapshot.plan, slice) : "",
    tier: snapshot.density[String(nodeId)]?.tier ?? null,
  };
}

/** Nodes flagged disconnected by the latest check of each slice. */
export function disconnectedNodes(snapshot: Snapshot): Set<number> {
  const latest = new Map<string, { at: number; nodes: number[] }>();
  for (const r of snapshot.reports) {
    const seen = latest.get(r.slice);
    if (!seen || r.checked_at >= seen.at) {
      latest.set(r.slice, { at: r.checked_at, nodes: r.disconnected });
    }
  }
  const out = new Set<number>();
  for (const { nodes } of latest.values()) {
    for (const n of nodes) out.add(n);
  }
  return out;
}

export function formatPdr(pdr: number | null | undefined): string {
  if (pdr === null || pdr === undefined) return "n/a";
  return `${(pdr * 100).toFixed(2)}%`;
}
