/** Trajectory panel: SVG race of S_k against u_alpha(k), plus the running
 * anytime p-value readout. The final plotted point is mirrored into data
 * attributes so scripted tests can read it back. */

import type { TrajectoryPoint } from "./api.js";

const W = 480;
const H = 240;
const PAD = 30;

function path(points: Array<[number, number]>): string {
  return points.map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
}

export function renderChart(
  container: HTMLElement,
  points: TrajectoryPoint[],
  status: string,
  rejectedAt: number | null = null,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  const svg = doc.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.setAttribute("class", "trajectory");
  if (points.length === 0) {
    svg.dataset.empty = "true";
    container.appendChild(svg);
    return;
  }
  const maxK = Math.max(...points.map((p) => p.k), 1);
  const values = points.flatMap((p) => [p.statistic, p.bound]);
  const lo = Math.min(...values, 0);
  const hi = Math.max(...values, 1);
  const sx = (k: number) => PAD + ((W - 2 * PAD) * (k - 1)) / Math.max(maxK - 1, 1);
  const sy = (v: number) => H - PAD - ((H - 2 * PAD) * (v - lo)) / (hi - lo);

  const statLine = doc.createElementNS(svg.namespaceURI, "path") as SVGPathElement;
  statLine.setAttribute("id", "stat-line");
  statLine.setAttribute("fill", "none");
  statLine.setAttribute("stroke", "#c0392b");
  statLine.setAttribute("d", path(points.map((p) => [sx(p.k), sy(p.statistic)])));
  const boundLine = doc.createElementNS(svg.namespaceURI, "path") as SVGPathElement;
  boundLine.setAttribute("id", "bound-line");
  boundLine.setAttribute("fill", "none");
  boundLine.setAttribute("stroke", "#2c3e50");
  boundLine.setAttribute("d", path(points.map((p) => [sx(p.k), sy(p.bound)])));
  svg.appendChild(boundLine);
  svg.appendChild(statLine);

  if (rejectedAt !== null) {
    const hit = points.find((p) => p.k === rejectedAt);
    if (hit) {
      const marker = doc.createElementNS(svg.namespaceURI, "circle") as SVGCircleElement;
      marker.setAttribute("id", "rejection-marker");
      marker.setAttribute("cx", sx(hit.k).toFixed(2));
      marker.setAttribute("cy", sy(hit.statistic).toFixed(2));
      marker.setAttribute("r", "5");
      marker.setAttribute("fill", "#c0392b");
      svg.appendChild(marker);
    }
  }

  const last = points[points.length - 1];
  svg.dataset.lastK = String(last.k);
  svg.dataset.lastStatistic = String(last.statistic);
  svg.dataset.lastBound = String(last.bound);
  svg.dataset.lastPAnytime = String(last.p_anytime);
  svg.dataset.status = status;
  container.appendChild(svg);

  const readout = doc.createElement("div");
  readout.className = "anytime-readout";
  readout.dataset.pAnytime = String(last.p_anytime);
  readout.textContent = `anytime p = ${last.p_anytime.toPrecision(4)} (e = ${(1 / last.p_anytime).toPrecision(4)})`;
  container.appendChild(readout);
}
