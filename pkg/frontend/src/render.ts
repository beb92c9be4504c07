/** Canvas topology view and DOM panels for one snapshot epoch. */

import type { Snapshot } from "./api.js";
import {
  disconnectedNodes,
  formatPdr,
  hoverInfo,
  nodeColor,
  RAG_COLORS,
} from "./viewmodel.js";

export interface CanvasGeometry {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fitGeometry(
  snapshot: Snapshot,
  width: number,
  height: number,
): CanvasGeometry {
  const xs = snapshot.topology.nodes.map((n) => n.x);
  const ys = snapshot.topology.nodes.map((n) => n.y);
  if (xs.length === 0) {
    return { scale: 1, offsetX: 0, offsetY: 0 };
  }
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const margin = 30;
  const spanX = Math.max(maxX - minX, 1);
  const spanY = Math.max(maxY - minY, 1);
  const scale = Math.min(
    (width - 2 * margin) / spanX,
    (height - 2 * margin) / spanY,
  );
  return {
    scale,
    offsetX: margin - minX * scale,
    offsetY: margin - minY * scale,
  };
}

export function toCanvas(
  geo: CanvasGeometry,
  x: number,
  y: number,
): [number, number] {
  return [x * geo.scale + geo.offsetX, y * geo.scale + geo.offsetY];
}

export function nodeAt(
  snapshot: Snapshot,
  geo: CanvasGeometry,
  px: number,
  py: number,
): number | null {
  for (const n of snapshot.topology.nodes) {
    const [cx, cy] = toCanvas(geo, n.x, n.y);
    if ((cx - px) ** 2 + (cy - py) ** 2 <= 8 ** 2) {
      return n.id;
    }
  }
  return null;
}

export function drawTopology(
  ctx: CanvasRenderingContext2D,
  snapshot: Snapshot,
  geo: CanvasGeometry,
  pulsePhase: number,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  if (snapshot.topology.nodes.length === 0) {
    ctx.fillStyle = "#666";
    ctx.font = "16px sans-serif";
    ctx.fillText("no topology loaded", 20, 30);
    return;
  }
  const positions = new Map<number, [number, number]>();
  for (const n of snapshot.topology.nodes) {
    positions.set(n.id, toCanvas(geo, n.x, n.y));
  }
  ctx.strokeStyle = "rgba(120,120,120,0.25)";
  ctx.lineWidth = 1;
  for (const [a, b] of snapshot.topology.edges) {
    const pa = positions.get(a);
    const pb = positions.get(b);
    if (!pa || !pb) continue;
    ctx.beginPath();
    ctx.moveTo(pa[0], pa[1]);
    ctx.lineTo(pb[0], pb[1]);
    ctx.stroke();
  }
  const severed = disconnectedNodes(snapshot);
  for (const n of snapshot.topology.nodes) {
    const [cx, cy] = positions.get(n.id)!;
    const router = n.role === "border-router";
    ctx.beginPath();
    if (router) {
      ctx.rect(cx - 7, cy - 7, 14, 14);
    } else {
      ctx.arc(cx, cy, 6, 0, 2 * Math.PI);
    }
    ctx.fillStyle = nodeColor(n, snapshot.density);
    ctx.fill();
    ctx.strokeStyle = router ? "#102060" : "#333";
    ctx.lineWidth = router ? 2 : 1;
    ctx.stroke();
    if (severed.has(n.id)) {
      // pulsing red halo on nodes the latest check flagged
      ctx.beginPath();
      ctx.arc(cx, cy, 9 + 3 * Math.abs(Math.sin(pulsePhase)), 0, 2 * Math.PI);
      ctx.strokeStyle = "rgba(208,48,48,0.9)";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
  // channel labels beside each border router
  ctx.font = "12px sans-serif";
  ctx.fillStyle = "#222";
  for (const s of snapshot.plan.slices) {
    const pos = positions.get(s.border_router);
    if (!pos) continue;
    const label =
      s.channel === null ? `${s.id}` : `${s.id} ch. ${s.channel}`;
    ctx.fillText(label, pos[0] + 10, pos[1] - 10);
  }
}

export function renderHover(
  el: HTMLElement,
  snapshot: Snapshot,
  nodeId: number | null,
): void {
  if (nodeId === null) {
    el.textContent = "hover a node for details";
    return;
  }
  const info = hoverInfo(snapshot, nodeId);
  el.textContent =
    `node ${info.id} (${info.role})  degree ${info.degree}` +
    `  slice ${info.slice ?? "-"} ${info.channel}` +
    (info.tier ? `  tier ${info.tier}` : "");
}

export function renderLegend(el: HTMLElement): void {
  el.innerHTML = "";
  for (const [tier, color] of Object.entries(RAG_COLORS)) {
    const item = document.createElement("span");
    item.className = "legend-item";
    const dot = document.createElement("span");
    dot.className = "legend-dot";
    dot.style.backgroundColor = color;
    item.append(dot, document.createTextNode(tier));
    el.append(item);
  }
}

export function renderReports(el: HTMLElement, snapshot: Snapshot): void {
  el.innerHTML = "";
  if (snapshot.reports.length === 0) {
    el.textContent = "no connectivity checks yet";
    return;
  }
  const rows = [...snapshot.reports].sort(
    (a, b) => b.checked_at - a.checked_at,
  );
  for (const r of rows.slice(0, 20)) {
    const line = document.createElement("div");
    line.className = r.fully_connected ? "report-ok" : "report-bad";
    line.textContent = r.fully_connected
      ? `t=${r.checked_at.toFixed(0)}s slice ${r.slice}: connected ✓`
      : `t=${r.checked_at.toFixed(0)}s slice ${r.slice}: disconnected ` +
        r.disconnected.join(", ");
    el.append(line);
  }
}

export function renderPdr(el: HTMLElement, snapshot: Snapshot): void {
  const p = snapshot.pdr;
  const rows: string[] = [
    `overall ${formatPdr(p.pdr)} (${p.received}/${p.sent})`,
  ];
  for (const [sid, bucket] of Object.entries(p.per_slice)) {
    rows.push(
      `slice ${sid} ${formatPdr(bucket.pdr)} (${bucket.received}/${bucket.sent})`,
    );
  }
  const dropParts = Object.entries(p.drops)
    .filter(([, v]) => v > 0)
    .map(([k, v]) => `${k.replace("dropped_", "")}=${v}`);
  if (dropParts.length) rows.push(`drops: ${dropParts.join("  ")}`);
  el.textContent = rows.join("\n");
}

export function renderPdrChart(
  ctx: CanvasRenderingContext2D,
  series: Map<string, { t: number; pdr: number }[]>,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  const palette = ["#222222", "#2e9e4f", "#3050c0", "#d03030", "#e08020"];
  let colorIdx = 0;
  let maxT = 1;
  for (const points of series.values()) {
    for (const p of points) maxT = Math.max(maxT, p.t);
  }
  ctx.font = "11px sans-serif";
  let legendY = 14;
  for (const [name, points] of series) {
    const color = palette[colorIdx++ % palette.length];
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach((p, i) => {
      const x = (p.t / maxT) * (width - 10) + 5;
      const y = height - 5 - p.pdr * (height - 10);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(name, 8, legendY);
    legendY += 13;
  }
}

export function renderEditor(
  root: HTMLElement,
  snapshot: Snapshot,
  draftSliceOf: (nodeId: number) => string | null,
  error: string | null,
  dirty: boolean,
): void {
  const errorEl = root.querySelector<HTMLElement>(".editor-error")!;
  errorEl.textContent = error ?? "";
  errorEl.style.display = error ? "block" : "none";
  const stateEl = root.querySelector<HTMLElement>(".editor-state")!;
  stateEl.textContent = dirty ? "draft has unsubmitted edits" : "in sync";
  const listEl = root.querySelector<HTMLElement>(".editor-slices")!;
  listEl.innerHTML = "";
  for (const s of snapshot.plan.slices) {
    const drafted = snapshot.topology.nodes.filter(
      (n) => n.role === "sensor" && draftSliceOf(n.id) === s.id,
    ).length;
    const line = document.createElement("div");
    line.textContent =
      `${s.id}: ${drafted} nodes, router ${s.border_router}, ` +
      (s.channel === null ? "shared channel" : `channel ${s.channel}`) +
      (s.id === snapshot.plan.default_slice ? " (default)" : "");
    listEl.append(line);
  }
}
