/**
 * End-to-end: the built bridge serving real matches for the Python engine.
 *
 * Spawns `python3 -m marketgames.cli simulate` with `node dist/serve.js`
 * as the external agent command, then reads the trajectory log and the
 * extraction CSV back.  Requires dist/ (the pretest hook builds it).
 */
import { spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeAll, describe, expect, it } from "vitest";

const SERVE = fileURLToPath(new URL("../dist/serve.js", import.meta.url));

interface CliResult {
  status: number | null;
  stdout: string;
  stderr: string;
}

function runCli(args: string[], cwd: string): CliResult {
  const result = spawnSync("python3", ["-m", "marketgames.cli", ...args], {
    cwd,
    encoding: "utf8",
    timeout: 55_000,
  });
  return { status: result.status, stdout: result.stdout, stderr: result.stderr };
}

function readJsonl(path: string): Record<string, unknown>[] {
  return readFileSync(path, "utf8")
    .trim()
    .split("\n")
    .map((line) => JSON.parse(line) as Record<string, unknown>);
}

function readCsv(path: string): Record<string, string>[] {
  const [head, ...rows] = readFileSync(path, "utf8").trim().split("\n");
  const cols = head!.split(",");
  return rows.map((line) => {
    const cells = line.split(",");
    return Object.fromEntries(cols.map((c, k) => [c, cells[k] ?? ""]));
  });
}

describe("bridge against the live engine", () => {
  let dir: string;

  beforeAll(() => {
    if (!existsSync(SERVE)) {
      throw new Error(`${SERVE} missing -- run \`npm run build\` first`);
    }
    dir = mkdtempSync(join(tmpdir(), "bridge-e2e-"));
  });

  it("completes a 10-round match with two bridge agents and no violations", () => {
    const sessionLogs = [join(dir, "session-0.jsonl"), join(dir, "session-1.jsonl")];
    const agent = (k: number) => ({
      type: "external",
      command: [
        "node", SERVE,
        "--backend", "br",
        "--variant", "myopic",
        "--session-log", sessionLogs[k]!,
      ],
    });
    const configPath = join(dir, "open.json");
    writeFileSync(configPath, JSON.stringify({
      game: { kind: "cournot", valuations: [15, 15], capacity: 1 },
      horizon: 10,
      mode: "open",
      match_id: "e2e-open",
      agents: [agent(0), agent(1)],
    }));
    const logPath = join(dir, "open.jsonl");
    const run = runCli(["simulate", "--config", configPath, "--log", logPath], dir);
    expect(run.stderr).toBe("");
    expect(run.status).toBe(0);
    expect(run.stdout).toContain("status=completed");

    const lines = readJsonl(logPath);
    const status = lines.find((l) => l.kind === "status");
    expect(status?.status).toBe("completed");
    const rounds = lines.filter((l) => l.kind === "round");
    expect(rounds).toHaveLength(10);
    const last = rounds.at(-1)!.actions as number[];
    expect(last[0]).toBeCloseTo(5, 6);
    expect(last[1]).toBeCloseTo(5, 6);

    for (const path of sessionLogs) {
      const records = readJsonl(path);
      expect(records).toHaveLength(10);
      for (const record of records) {
        expect(record.action).not.toBeNull();
        expect(record.attempts).toBe(1);
        expect(record.prompt).toContain("THIS round only");
      }
    }
  });

  it("recovers the trust ladder from a scripted bridge agent", () => {
    const plan = [5, 4, 3.75, 3.75, 3.75, 3.75, 3.75, 3.75, 4.5, 5.25];
    const sessionLog = join(dir, "session-coop.jsonl");
    const configPath = join(dir, "coop.json");
    writeFileSync(configPath, JSON.stringify({
      game: { kind: "cournot", valuations: [15, 15], capacity: 1 },
      horizon: 10,
      mode: "open",
      match_id: "e2e-coop",
      agents: [
        {
          type: "external",
          command: [
            "node", SERVE,
            "--backend", "scripted",
            "--script", JSON.stringify(plan),
            "--variant", "cooperative",
            "--session-log", sessionLog,
          ],
        },
        { type: "synthetic" },
      ],
    }));
    const logPath = join(dir, "coop.jsonl");
    const run = runCli(["simulate", "--config", configPath, "--log", logPath], dir);
    expect(run.stderr).toBe("");
    expect(run.status).toBe(0);

    const rounds = readJsonl(logPath).filter((l) => l.kind === "round");
    expect(rounds.map((r) => (r.actions as number[])[0])).toEqual(plan);

    const csvPath = join(dir, "coop-extraction.csv");
    const extract = runCli(["extract", "--log", logPath, "--out", csvPath], dir);
    expect(extract.status).toBe(0);
    const rows = readCsv(csvPath);
    const theta = (round: number, agentIdx: number): number => {
      const row = rows.find(
        (r) => r.round === String(round) && r.agent === String(agentIdx),
      );
      expect(row, `extraction row for round ${round}, agent ${agentIdx}`).toBeDefined();
      return Number(row!.theta);
    };
    expect(theta(2, 0)).toBeCloseTo(0.4, 9);
    expect(theta(3, 1)).toBeCloseTo(0.75, 9);
    expect(theta(5, 0)).toBeCloseTo(1.0, 9);
    expect(theta(5, 1)).toBeCloseTo(1.0, 9);

    const prompts = readJsonl(sessionLog).map((r) => r.prompt as string);
    expect(prompts).toHaveLength(10);
    expect(prompts[0]).toContain("Key Insight for Collaboration");
    expect(prompts[0]).toContain("Establish a low-quantity cooperation state");
  });
});
