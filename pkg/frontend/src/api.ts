/** Typed client for the controller's northbound HTTP+JSON API.
 *
 * Every read used for rendering goes through fetchSnapshot(), which tags
 * the result with a monotonically increasing epoch so the view never mixes
 * data from two different polling rounds.
 */

export interface NodeInfo {
  id: number;
  x: number;
  y: number;
  role: string;
  category: string;
}

export interface Topology {
  comm_range: number;
  nodes: NodeInfo[];
  edges: [number, number][];
}

export interface SliceJson {
  id: string;
  members: number[];
  channel: number | null;
  border_router: number;
}

export interface PlanJson {
  mode: string;
  default_slice: string;
  slices: SliceJson[];
}

export interface DensityEntry {
  tier: string;
  percentile: number;
}

export type DensityMap = Record<string, DensityEntry>;

export interface ConnectivityReport {
  slice: string;
  target: number;
  disconnected: number[];
  checked_at: number;
  fully_connected: boolean;
}

export interface PdrJson {
  sent: number;
  received: number;
  pdr: number | null;
  undefined: boolean;
  per_slice: Record<string, { sent: number; received: number; pdr: number | null }>;
  drops: Record<string, number>;
}

export interface SimStatus {
  status: string;
  time?: number;
  duration?: number;
  sent?: number;
  received?: number;
  pdr?: number | null;
}

export interface ApiError {
  status: number;
  reason: string;
  detail: string;
}

export interface Snapshot {
  epoch: number;
  topology: Topology;
  plan: PlanJson;
  density: DensityMap;
  reports: ConnectivityReport[];
  pdr: PdrJson;
  sim: SimStatus;
}

/** fetch-compatible function, injectable for tests. */
export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private epoch = 0;

  constructor(
    private readonly base: string = "",
    private readonly fetcher: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetcher(this.base + path, init);
    const data = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const err: ApiError = {
        status: resp.status,
        reason: (data as { reason?: string }).reason ?? `http-${resp.status}`,
        detail: (data as { detail?: string }).detail ?? "",
      };
      throw err;
    }
    return data as T;
  }

  getTopology(): Promise<Topology> {
    return this.request("GET", "/topology");
  }

  getPlan(): Promise<PlanJson> {
    return this.request("GET", "/plan");
  }

  putPlan(plan: PlanJson): Promise<{ plan: PlanJson }> {
    return this.request("PUT", "/plan", plan);
  }

  postDelta(delta: {
    moves?: [number, string][];
    channel_changes?: [string, number][];
  }): Promise<{ plan: PlanJson; channel_retunes: [number, number][] }> {
    return this.request("POST", "/plan/delta", delta);
  }

  getDensity(): Promise<DensityMap> {
    return this.request("GET", "/density");
  }

  runChecks(slice?: string): Promise<ConnectivityReport[]> {
    const query = slice ? `?slice=${encodeURIComponent(slice)}` : "";
    return this.request("POST", `/codet/run${query}`);
  }

  getReports(): Promise<ConnectivityReport[]> {
    return this.request("GET", "/codet/reports");
  }

  getPdr(): Promise<PdrJson> {
    return this.request("GET", "/pdr");
  }

  getSimStatus(): Promise<SimStatus> {
    return this.request("GET", "/sim/status");
  }

  simStart(): Promise<SimStatus> {
    return this.request("POST", "/sim/start");
  }

  simPause(): Promise<SimStatus> {
    return this.request("POST", "/sim/pause");
  }

  simStep(events: number): Promise<SimStatus> {
    return this.request("POST", `/sim/step?events=${events}`);
  }

  /** One consistent read of everything the dashboard renders. */
  async fetchSnapshot(): Promise<Snapshot> {
    const epoch = ++this.epoch;
    const [topology, plan, density, reports, pdr, sim] = await Promise.all([
      this.getTopology(),
      this.getPlan(),
      this.getDensity(),
      this.getReports(),
      this.getPdr(),
      this.getSimStatus(),
    ]);
    return { epoch, topology, plan, density, reports, pdr, sim };
  }
}

export function isApiError(e: unknown): e is ApiError {
  return (
    typeof e === "object" &&
    e !== null &&
    "reason" in e &&
    "status" in e
  );
}
