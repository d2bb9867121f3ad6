/** Console wiring: one open session per page, board + chart + suggestions.
 *
 * Picks are irreversible, so the UI never renders a pick before the server
 * acknowledges it; every state transition flows through the API responses.
 */

import { SessionClient, type PickEvent } from "./api.js";
import { renderBoard } from "./board.js";
import { renderChart } from "./chart.js";
import { replayBoard } from "./replay.js";
import { applyPick, applySuggestions, fromView, type BoardState } from "./state.js";

export interface ConsoleElements {
  board: HTMLElement;
  chart: HTMLElement;
  policySelect: HTMLSelectElement | null;
}

export class Console {
  state: BoardState | null = null;
  private rejectedAt: number | null = null;
  private unsubscribe: (() => void) | null = null;

  constructor(
    readonly client: SessionClient,
    readonly els: ConsoleElements,
  ) {}

  async open(sessionId: string): Promise<void> {
    const view = await this.client.view(sessionId);
    this.state = fromView(view);
    const traj = await this.client.trajectory(sessionId);
    this.state = { ...this.state, trajectory: traj.points };
    const last = traj.points[traj.points.length - 1];
    if (view.status === "rejected" && last) this.rejectedAt = last.k;
    if (last) this.state.pAnytime = last.p_anytime;
    this.render();
    if (view.status === "active") {
      this.unsubscribe = this.client.subscribe(sessionId, (e) => this.onRemoteEvent(e));
    }
  }

  async create(body: Record<string, unknown>): Promise<string> {
    const view = await this.client.createSession(body);
    this.state = fromView(view);
    this.render();
    return view.session_id;
  }

  close(): void {
    this.unsubscribe?.();
    this.unsubscribe = null;
  }

  /** Click handler: the board re-renders only from the pick response. */
  async pick(id: number): Promise<void> {
    if (!this.state || this.state.status !== "active") return;
    const event = await this.client.pick(this.state.sessionId, id);
    this.applyEvent(event);
  }

  private onRemoteEvent(event: PickEvent): void {
    if (!this.state) return;
    if (event.k <= this.state.k) return; // already applied locally
    this.applyEvent(event);
  }

  private applyEvent(event: PickEvent): void {
    if (!this.state) return;
    this.state = applyPick(this.state, event);
    if (event.status === "rejected") this.rejectedAt = event.k;
    this.render();
  }

  async suggest(policy: string): Promise<void> {
    if (!this.state || !policy) return;
    const resp = await this.client.suggest(this.state.sessionId, policy);
    this.state = applySuggestions(
      this.state,
      resp.candidates.map((c) => c.id),
    );
    this.render();
  }

  clearSuggestions(): void {
    if (!this.state) return;
    this.state = applySuggestions(this.state, []);
    this.render();
  }

  /** Replay a downloaded log against the session's initial masked view. */
  async replay(sessionId: string, logText: string): Promise<void> {
    this.close();
    const view = await this.client.view(sessionId);
    this.state = replayBoard(view, logText);
    const last = this.state.trajectory[this.state.trajectory.length - 1];
    this.rejectedAt = this.state.status === "rejected" && last ? last.k : null;
    if (last) this.state.pAnytime = last.p_anytime;
    this.render();
  }

  render(): void {
    if (!this.state) return;
    renderBoard(this.els.board, this.state, (id) => void this.pick(id));
    renderChart(this.els.chart, this.state.trajectory, this.state.status, this.rejectedAt);
  }
}
