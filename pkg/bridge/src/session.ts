/**
 * Per-agent session records: what was asked, what the model said, what
 * was played.  One session belongs to exactly one agent process, so
 * records can never reference another agent's prompts or reasoning.
 */
import { appendFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";

export interface SessionRecord {
  match_id: string;
  agent_index: number;
  round: number;
  prompt: string;
  reply: string;
  /** Reply with the final Output line removed: the chain of thought. */
  cot: string;
  action: number | null;
  attempts: number;
  error?: string;
}

export function stripOutputLine(reply: string): string {
  return reply
    .split("\n")
    .filter((line) => !/^\s*output\s*:/i.test(line))
    .join("\n")
    .trimEnd();
}

export class SessionLog {
  readonly records: SessionRecord[] = [];

  constructor(private readonly path?: string) {
    if (path) {
      mkdirSync(dirname(path), { recursive: true });
    }
  }

  append(record: SessionRecord): void {
    this.records.push(record);
    if (this.path) {
      appendFileSync(this.path, JSON.stringify(record) + "\n", "utf8");
    }
  }
}
