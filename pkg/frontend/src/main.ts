/** Dashboard wiring: 1 Hz polling loop, canvas rendering, slice editor,
 * connectivity panel, and live PDR chart. All state mutation goes through
 * the documented API endpoints; each render uses exactly one snapshot. */

import { ApiClient, Snapshot } from "./api.js";
import { SliceEditor } from "./editor.js";
import {
  drawTopology,
  fitGeometry,
  nodeAt,
  renderEditor,
  renderHover,
  renderLegend,
  renderPdr,
  renderPdrChart,
  renderReports,
} from "./render.js";
import { formatPdr, sliceOf } from "./viewmodel.js";

const api = new ApiClient("");
const canvas = document.getElementById("topology") as HTMLCanvasElement;
const chartCanvas = document.getElementById("pdr-chart") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const chartCtx = chartCanvas.getContext("2d")!;

const staleBanner = document.getElementById("stale-banner")!;
const hoverEl = document.getElementById("hover")!;
const legendEl = document.getElementById("legend")!;
const reportsEl = document.getElementById("reports")!;
const pdrEl = document.getElementById("pdr")!;
const simStatusEl = document.getElementById("sim-status")!;
const editorRoot = document.getElementById("editor")!;

let snapshot: Snapshot | null = null;
let editor: SliceEditor | null = null;
let hoveredNode: number | null = null;
let selectedNode: number | null = null;
const pdrSeries = new Map<string, { t: number; pdr: number }[]>();

renderLegend(legendEl);

function draftSliceOf(nodeId: number): string | null {
  if (editor) {
    for (const s of editor.draft.slices) {
      if (s.members.includes(nodeId) || s.border_router === nodeId) {
        return s.id;
      }
    }
    return null;
  }
  return snapshot ? sliceOf(snapshot.plan, nodeId) : null;
}

function render(): void {
  if (!snapshot) return;
  const geo = fitGeometry(snapshot, canvas.width, canvas.height);
  drawTopology(ctx, snapshot, geo, performance.now() / 300);
  renderHover(hoverEl, snapshot, hoveredNode ?? selectedNode);
  renderReports(reportsEl, snapshot);
  renderPdr(pdrEl, snapshot);
  renderPdrChart(chartCtx, pdrSeries);
  simStatusEl.textContent =
    `sim: ${snapshot.sim.status}` +
    (snapshot.sim.time !== undefined
      ? ` t=${snapshot.sim.time.toFixed(1)}s/` +
        `${snapshot.sim.duration?.toFixed(0)}s pdr=${formatPdr(snapshot.sim.pdr)}`
      : "");
  if (editor) {
    renderEditor(editorRoot, snapshot, draftSliceOf, editor.error, editor.dirty);
  }
}

function recordPdrPoint(s: Snapshot): void {
  const t = s.sim.time ?? 0;
  if (s.pdr.pdr !== null) {
    const overall = pdrSeries.get("overall") ?? [];
    overall.push({ t, pdr: s.pdr.pdr });
    pdrSeries.set("overall", overall.slice(-600));
  }
  for (const [sid, bucket] of Object.entries(s.pdr.per_slice)) {
    if (bucket.pdr === null) continue;
    const series = pdrSeries.get(`slice ${sid}`) ?? [];
    series.push({ t, pdr: bucket.pdr });
    pdrSeries.set(`slice ${sid}`, series.slice(-600));
  }
}

async function poll(): Promise<void> {
  try {
    const next = await api.fetchSnapshot();
    // never mix epochs: replace wholesale, keep only the newest
    if (!snapshot || next.epoch > snapshot.epoch) {
      snapshot = next;
      if (!editor) {
        editor = new SliceEditor(api, snapshot.plan);
      } else if (!editor.dirty) {
        editor.reset(snapshot.plan);
      }
      recordPdrPoint(next);
    }
    staleBanner.style.display = "none";
  } catch {
    staleBanner.style.display = "block";
  }
  render();
}

// -- interactions -----------------------------------------------------

canvas.addEventListener("mousemove", (ev) => {
  if (!snapshot) return;
  const rect = canvas.getBoundingClientRect();
  const geo = fitGeometry(snapshot, canvas.width, canvas.height);
  hoveredNode = nodeAt(
    snapshot, geo, ev.clientX - rect.left, ev.clientY - rect.top,
  );
  render();
});

canvas.addEventListener("click", () => {
  selectedNode = hoveredNode;
  const moveControls = document.getElementById("move-controls")!;
  moveControls.style.display = selectedNode === null ? "none" : "block";
  if (selectedNode !== null && snapshot) {
    const select = document.getElementById("move-target") as HTMLSelectElement;
    select.innerHTML = "";
    for (const s of snapshot.plan.slices) {
      const opt = document.createElement("option");
      opt.value = s.id;
      opt.textContent = s.id;
      select.append(opt);
    }
    document.getElementById("move-label")!.textContent =
      `move node ${selectedNode} to:`;
  }
  render();
});

document.getElementById("move-apply")!.addEventListener("click", () => {
  if (editor && selectedNode !== null) {
    const select = document.getElementById("move-target") as HTMLSelectElement;
    editor.moveNode(selectedNode, select.value);
    render();
  }
});

document.getElementById("channel-apply")!.addEventListener("click", () => {
  if (!editor) return;
  const sliceId =
    (document.getElementById("channel-slice") as HTMLInputElement).value;
  const raw =
    (document.getElementById("channel-value") as HTMLInputElement).value;
  editor.setChannel(sliceId, raw === "" ? null : Number(raw));
  render();
});

document.getElementById("editor-submit")!.addEventListener("click", async () => {
  if (!editor) return;
  await editor.submit();
  await poll();
});

document.getElementById("editor-reset")!.addEventListener("click", () => {
  if (editor && snapshot) editor.reset(snapshot.plan);
  render();
});

document.getElementById("codet-run")!.addEventListener("click", async () => {
  const scope =
    (document.getElementById("codet-slice") as HTMLInputElement).value;
  try {
    await api.runChecks(scope || undefined);
  } catch {
    // surfaced through the reports panel on next poll
  }
  await poll();
});

document.getElementById("sim-start")!.addEventListener("click", async () => {
  try { await api.simStart(); } catch { /* shown in status */ }
  await poll();
});

document.getElementById("sim-pause")!.addEventListener("click", async () => {
  try { await api.simPause(); } catch { /* shown in status */ }
  await poll();
});

document.getElementById("sim-step")!.addEventListener("click", async () => {
  try { await api.simStep(50_000); } catch { /* shown in status */ }
  await poll();
});

// 1 Hz snapshot polling; swap for push transport here if ever needed.
void poll();
setInterval(poll, 1000);
