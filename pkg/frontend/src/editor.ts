/** Slice editor state: local draft edits, atomic submit, inline errors.
 *
 * The draft is a deep copy of the last-accepted plan; nothing touches the
 * controller until submit(), and a rejected submit leaves the server plan
 * untouched (the API validates atomically) while the rejection reason is
 * exposed verbatim for inline display.
 */

import { ApiClient, isApiError, PlanJson, SliceJson } from "./api.js";

function clonePlan(plan: PlanJson): PlanJson {
  return {
    mode: plan.mode,
    default_slice: plan.default_slice,
    slices: plan.slices.map((s) => ({
      id: s.id,
      members: [...s.members],
      channel: s.channel,
      border_router: s.border_router,
    })),
  };
}

export class SliceEditor {
  draft: PlanJson;
  error: string | null = null;
  dirty = false;

  constructor(
    private readonly api: ApiClient,
    accepted: PlanJson,
  ) {
    this.draft = clonePlan(accepted);
  }

  /** Reset the draft to a freshly accepted plan (e.g. after GET /plan). */
  reset(accepted: PlanJson): void {
    this.draft = clonePlan(accepted);
    this.error = null;
    this.dirty = false;
  }

  moveNode(nodeId: number, targetSlice: string): void {
    for (const s of this.draft.slices) {
      const at = s.members.indexOf(nodeId);
      if (at >= 0) s.members.splice(at, 1);
    }
    const target = this.draft.slices.find((s) => s.id === targetSlice);
    if (!target) {
      this.error = `unknown-slice: ${targetSlice}`;
      return;
    }
    target.members.push(nodeId);
    target.members.sort((a, b) => a - b);
    this.dirty = true;
    this.error = null;
  }

  setChannel(sliceId: string, channel: number | null): void {
    const s = this.draft.slices.find((x) => x.id === sliceId);
    if (!s) {
      this.error = `unknown-slice: ${sliceId}`;
      return;
    }
    s.channel = channel;
    this.dirty = true;
    this.error = null;
  }

  addSlice(spec: SliceJson): void {
    this.draft.slices.push({
      id: spec.id,
      members: [...spec.members],
      channel: spec.channel,
      border_router: spec.border_router,
    });
    this.dirty = true;
    this.error = null;
  }

  /** Sensors in no explicit slice fall into the default slice on submit;
   * surfaced here so the editor can show them greyed-in beforehand. */
  unassigned(allSensors: number[]): number[] {
    const assigned = new Set<number>();
    for (const s of this.draft.slices) {
      for (const m of s.members) assigned.add(m);
    }
    return allSensors.filter((n) => !assigned.has(n));
  }

  /** Atomic submit; on rejection the reason is kept for inline display
   * and the caller should re-render from GET /plan (unchanged server
   * state). Returns the accepted plan or null. */
  async submit(): Promise<PlanJson | null> {
    try {
      const { plan } = await this.api.putPlan(this.draft);
      this.reset(plan);
      return plan;
    } catch (e) {
      if (isApiError(e)) {
        this.error = e.detail ? `${e.reason}: ${e.detail}` : e.reason;
      } else {
        this.error = String(e);
      }
      return null;
    }
  }
}
