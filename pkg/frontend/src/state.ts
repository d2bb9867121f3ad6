/** Client-side view model: layout inference and board state.
 *
 * Only fields present in service responses exist here; hidden bits or truth
 * labels have no representation client-side.
 */

import type { BoardEntry, PickEvent, TrajectoryPoint, ViewResponse } from "./api.js";

export type Layout =
  | { kind: "grid"; rows: number; cols: number }
  | { kind: "tree" }
  | { kind: "list" };

export interface CellState {
  id: number;
  covariates: number[];
  masked: number;
  revealedP: number | null;
  /** sign annotation for revealed cells: "+" when p < 0.5, "-" otherwise */
  sign: "+" | "-" | null;
  suggestedRank: number | null;
}

export interface BoardState {
  sessionId: string;
  status: string;
  k: number;
  statistic: number;
  layout: Layout;
  cells: CellState[];
  trajectory: TrajectoryPoint[];
  pAnytime: number;
}

/** 2-D integer covariates forming a full lattice mean a grid; (level,
 * parent-id) pairs with -1 roots mean a tree; anything else lists. */
export function inferLayout(entries: BoardEntry[]): Layout {
  if (entries.length === 0) return { kind: "list" };
  const twoD = entries.every(
    (e) =>
      e.covariates.length >= 2 &&
      Number.isInteger(e.covariates[0]) &&
      Number.isInteger(e.covariates[1]),
  );
  if (!twoD) return { kind: "list" };
  const rows = 1 + Math.max(...entries.map((e) => e.covariates[0]));
  const cols = 1 + Math.max(...entries.map((e) => e.covariates[1]));
  const nonNegative = entries.every((e) => e.covariates[0] >= 0 && e.covariates[1] >= 0);
  if (nonNegative && rows * cols === entries.length) {
    const seen = new Set(entries.map((e) => `${e.covariates[0]},${e.covariates[1]}`));
    if (seen.size === entries.length) return { kind: "grid", rows, cols };
  }
  const ids = new Set(entries.map((e) => e.id));
  const hasRoot = entries.some((e) => e.covariates[1] === -1);
  const looksTree = entries.every(
    (e) => e.covariates[1] === -1 || ids.has(e.covariates[1]),
  );
  if (hasRoot && looksTree) return { kind: "tree" };
  return { kind: "list" };
}

export function toCell(entry: BoardEntry): CellState {
  return {
    id: entry.id,
    covariates: entry.covariates,
    masked: entry.masked,
    revealedP: entry.revealed_p,
    sign: entry.revealed_p === null ? null : entry.revealed_p < 0.5 ? "+" : "-",
    suggestedRank: null,
  };
}

export function fromView(view: ViewResponse): BoardState {
  const cells = view.entries.map(toCell);
  return {
    sessionId: view.session_id,
    status: view.status,
    k: view.k,
    statistic: view.statistic,
    layout: inferLayout(view.entries),
    cells,
    trajectory: [],
    pAnytime: 1.0,
  };
}

/** Server-acknowledged pick: the only way a cell transitions to revealed. */
export function applyPick(state: BoardState, event: PickEvent): BoardState {
  const cells = state.cells.map((cell) =>
    cell.id === event.id
      ? {
          ...cell,
          revealedP: event.revealed_p,
          sign: (event.revealed_p < 0.5 ? "+" : "-") as "+" | "-",
        }
      : cell,
  );
  return {
    ...state,
    status: event.status,
    k: event.k,
    statistic: event.statistic,
    cells,
    trajectory: [
      ...state.trajectory,
      { k: event.k, statistic: event.statistic, bound: event.bound, p_anytime: event.p_anytime },
    ],
    pAnytime: Math.min(state.pAnytime, event.p_anytime),
  };
}

export function applySuggestions(state: BoardState, ids: number[]): BoardState {
  const rank = new Map(ids.map((id, i) => [id, i + 1]));
  return {
    ...state,
    cells: state.cells.map((cell) => ({
      ...cell,
      suggestedRank: rank.get(cell.id) ?? null,
    })),
  };
}

export function listOrder(state: BoardState): CellState[] {
  return [...state.cells].sort((a, b) => a.masked - b.masked || a.id - b.id);
}
