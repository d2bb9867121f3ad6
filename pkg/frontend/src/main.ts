/** Browser entry point: minimal controls around the Console. */

import { SessionClient } from "./api.js";
import { Console } from "./app.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function boot(): void {
  const client = new SessionClient(
    (document.body.dataset.apiBase ?? "").replace(/\/$/, "") || window.location.origin,
  );
  const console_ = new Console(client, {
    board: el("board"),
    chart: el("chart"),
    policySelect: document.getElementById("policy") as HTMLSelectElement | null,
  });

  el<HTMLButtonElement>("create-grid").addEventListener("click", () => {
    void (async () => {
      const side = Number((el<HTMLInputElement>("grid-side") as HTMLInputElement).value || "10");
      const sid = await console_.create({
        scenario: { kind: "GridBlock", side, radius: Math.max(2, side / 14), mu: 2.0, seed: Date.now() % 100000 },
      });
      el<HTMLElement>("session-id").textContent = sid;
      await console_.open(sid);
    })();
  });

  el<HTMLButtonElement>("join").addEventListener("click", () => {
    void (async () => {
      const sid = el<HTMLInputElement>("session-input").value.trim();
      if (sid) {
        el<HTMLElement>("session-id").textContent = sid;
        await console_.open(sid);
      }
    })();
  });

  const policy = document.getElementById("policy") as HTMLSelectElement | null;
  policy?.addEventListener("change", () => {
    if (policy.value) void console_.suggest(policy.value);
    else console_.clearSuggestions();
  });

  el<HTMLButtonElement>("replay").addEventListener("click", () => {
    void (async () => {
      const sid = el<HTMLElement>("session-id").textContent?.trim();
      if (!sid) return;
      const log = await client.log(sid);
      await console_.replay(sid, log);
    })();
  });
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  boot();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
