/** Typed client for the session service HTTP+JSON API. */

export interface BoardEntry {
  id: number;
  covariates: number[];
  masked: number;
  picked: boolean;
  revealed_p: number | null;
}

export interface ViewResponse {
  session_id: string;
  status: string;
  k: number;
  statistic: number;
  entries: BoardEntry[];
}

export interface PickEvent {
  seq: number;
  action: string;
  k: number;
  id: number;
  revealed_p: number;
  statistic: number;
  bound: number;
  p_anytime: number;
  status: string;
  timestamp: number;
}

export interface TrajectoryPoint {
  k: number;
  statistic: number;
  bound: number;
  p_anytime: number;
}

export interface TrajectoryResponse {
  session_id: string;
  status: string;
  points: TrajectoryPoint[];
}

export interface SuggestEntry {
  id: number;
  posterior: number;
}

export interface SuggestResponse {
  session_id: string;
  policy: string;
  candidates: SuggestEntry[];
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message?: string) {
    super(message ?? code);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = `http_${resp.status}`;
    try {
      const body = await resp.json();
      code = body?.detail?.code ?? code;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, code);
  }
  return (await resp.json()) as T;
}

export class SessionClient {
  constructor(readonly baseUrl: string) {}

  async createSession(body: Record<string, unknown>): Promise<ViewResponse> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return asJson<ViewResponse>(resp);
  }

  async view(sessionId: string): Promise<ViewResponse> {
    return asJson(await fetch(`${this.baseUrl}/sessions/${sessionId}/view`));
  }

  async pick(sessionId: string, hypothesisId: number): Promise<PickEvent> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/pick`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ hypothesis_id: hypothesisId }),
    });
    return asJson<PickEvent>(resp);
  }

  async trajectory(sessionId: string): Promise<TrajectoryResponse> {
    return asJson(await fetch(`${this.baseUrl}/sessions/${sessionId}/trajectory`));
  }

  async suggest(sessionId: string, policy: string, count = 5): Promise<SuggestResponse> {
    return asJson(
      await fetch(
        `${this.baseUrl}/sessions/${sessionId}/suggest?policy=${encodeURIComponent(policy)}&count=${count}`,
      ),
    );
  }

  async log(sessionId: string): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/log`);
    if (!resp.ok) throw new ApiError(resp.status, `http_${resp.status}`);
    return await resp.text();
  }

  /** Live updates: EventSource when the runtime has one, else polling. */
  subscribe(sessionId: string, onEvent: (e: PickEvent) => void, pollMs = 500): () => void {
    const ES = (globalThis as { EventSource?: typeof EventSource }).EventSource;
    if (ES) {
      const source = new ES(`${this.baseUrl}/sessions/${sessionId}/events`);
      source.onmessage = (msg: MessageEvent<string>) => {
        const event = JSON.parse(msg.data) as PickEvent;
        if (event.action === "pick") onEvent(event);
      };
      return () => source.close();
    }
    let seenK = 0;
    let stopped = false;
    const tick = async () => {
      if (stopped) return;
      try {
        const traj = await this.trajectory(sessionId);
        for (const point of traj.points.slice(seenK)) {
          seenK = point.k;
          onEvent({
            seq: point.k,
            action: "pick",
            k: point.k,
            id: -1,
            revealed_p: NaN,
            statistic: point.statistic,
            bound: point.bound,
            p_anytime: point.p_anytime,
            status: traj.status,
            timestamp: Date.now() / 1000,
          });
        }
      } finally {
        if (!stopped) setTimeout(tick, pollMs);
      }
    };
    void tick();
    return () => {
      stopped = true;
    };
  }
}
