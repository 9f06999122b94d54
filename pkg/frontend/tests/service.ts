/** Spawns the real pipeline service for integration tests. */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface RunningService {
  baseUrl: string;
  stop: () => void;
}

export async function startService(): Promise<RunningService> {
  const port = 8100 + Math.floor(Math.random() * 900);
  const sessionsDir = mkdtempSync(join(tmpdir(), "sde-ui-sessions-"));
  const child: ChildProcess = spawn(
    "semanticdraw",
    ["serve", "--port", String(port), "--sessions-dir", sessionsDir, "--backend", "stub"],
    { stdio: "ignore" },
  );
  const baseUrl = `http://127.0.0.1:${port}`;

  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${baseUrl}/templates`);
      if (response.ok) {
        return { baseUrl, stop: () => child.kill() };
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  child.kill();
  throw new Error(`service did not come up on ${baseUrl}`);
}
