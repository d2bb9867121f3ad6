/** Boots the real session service for the e2e tests. */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

let server: ChildProcess | null = null;
let dataDir = "";

async function waitForReady(url: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${url}/sessions`);
      if (resp.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("session service did not come up");
}

export default async function setup(): Promise<() => void> {
  const port = 8600 + Math.floor(Math.random() * 400);
  const url = `http://127.0.0.1:${port}`;
  dataDir = mkdtempSync(join(tmpdir(), "seqnull-e2e-"));
  server = spawn(
    "python3",
    ["-m", "seqnull.cli", "serve", "--host", "127.0.0.1", "--port", String(port), "--data-dir", dataDir],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  process.env.SEQNULL_URL = url;
  await waitForReady(url);
  return () => {
    server?.kill("SIGTERM");
    try {
      rmSync(dataDir, { recursive: true, force: true });
    } catch {
      /* best effort */
    }
  };
}
