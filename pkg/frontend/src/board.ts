/** Heatmap board: cells colored by masked value, darker = smaller.
 *
 * The color scale is pinned to [0, 0.5] so conservative nulls visibly pool
 * at the light end. Clicking an unrevealed cell issues a pick; cell state
 * changes only after the server acknowledges (no optimistic updates).
 */

import type { BoardState, CellState } from "./state.js";
import { listOrder } from "./state.js";

export type PickHandler = (id: number) => void;

function shade(masked: number): string {
  // masked in [0, 0.5] -> lightness 25%..92%
  const t = Math.max(0, Math.min(1, masked / 0.5));
  const light = 25 + 67 * t;
  return `hsl(215, 60%, ${light}%)`;
}

function cellButton(doc: Document, cell: CellState, locked: boolean, onPick: PickHandler): HTMLElement {
  const btn = doc.createElement("button");
  btn.className = "cell" + (cell.revealedP !== null ? " revealed" : "");
  btn.dataset.id = String(cell.id);
  btn.dataset.masked = cell.masked.toFixed(6);
  btn.style.backgroundColor = shade(cell.masked);
  btn.title = `#${cell.id} masked=${cell.masked.toFixed(4)}`;
  if (cell.revealedP !== null) {
    btn.textContent = cell.sign ?? "";
    btn.dataset.revealedP = String(cell.revealedP);
    btn.disabled = true;
  } else {
    btn.textContent = "";
    btn.disabled = locked;
    if (!locked) {
      btn.addEventListener("click", () => onPick(cell.id));
    }
  }
  if (cell.suggestedRank !== null) {
    btn.classList.add("suggested");
    btn.dataset.suggestedRank = String(cell.suggestedRank);
  }
  return btn;
}

export function renderBoard(
  container: HTMLElement,
  state: BoardState,
  onPick: PickHandler,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  const locked = state.status !== "active";
  const board = doc.createElement("div");
  board.className = `board ${state.layout.kind}`;
  if (state.layout.kind === "grid") {
    board.style.display = "grid";
    board.style.gridTemplateColumns = `repeat(${state.layout.cols}, 1.4em)`;
    const byPos = new Map(state.cells.map((c) => [`${c.covariates[0]},${c.covariates[1]}`, c]));
    for (let r = 0; r < state.layout.rows; r += 1) {
      for (let c = 0; c < state.layout.cols; c += 1) {
        const cell = byPos.get(`${r},${c}`);
        if (cell) board.appendChild(cellButton(doc, cell, locked, onPick));
      }
    }
  } else {
    // tree and plain collections both render as a masked-sorted list
    for (const cell of listOrder(state)) {
      board.appendChild(cellButton(doc, cell, locked, onPick));
    }
  }
  container.appendChild(board);

  const banner = doc.createElement("div");
  banner.className = `banner ${state.status}`;
  banner.dataset.status = state.status;
  banner.textContent =
    state.status === "rejected"
      ? `Global null rejected at k = ${state.k}`
      : state.status === "exhausted"
        ? "All hypotheses revealed; no rejection"
        : `S_k = ${state.statistic} after ${state.k} picks`;
  container.appendChild(banner);
}
