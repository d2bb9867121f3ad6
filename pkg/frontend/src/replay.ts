/** Replay mode: rebuild a finished board and chart from a downloaded
 * JSON-lines event log, as if the session were live. */

import type { PickEvent, TrajectoryPoint, ViewResponse } from "./api.js";
import { applyPick, fromView, type BoardState } from "./state.js";

export interface ParsedLog {
  picks: PickEvent[];
  trajectory: TrajectoryPoint[];
  finalStatus: string;
}

export function parseLog(text: string): ParsedLog {
  const picks: PickEvent[] = [];
  for (const line of text.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const event = JSON.parse(trimmed) as PickEvent;
    if (event.action === "pick") picks.push(event);
  }
  const trajectory = picks.map((e) => ({
    k: e.k,
    statistic: e.statistic,
    bound: e.bound,
    p_anytime: e.p_anytime,
  }));
  const finalStatus = picks.length ? picks[picks.length - 1].status : "active";
  return { picks, trajectory, finalStatus };
}

/** Board state from the initial masked view plus the recorded picks. */
export function replayBoard(initialView: ViewResponse, logText: string): BoardState {
  const blank: ViewResponse = {
    ...initialView,
    k: 0,
    statistic: 0,
    status: "active",
    entries: initialView.entries.map((e) => ({ ...e, picked: false, revealed_p: null })),
  };
  let state = fromView(blank);
  for (const event of parseLog(logText).picks) {
    state = applyPick(state, event);
  }
  return state;
}
