/**
 * Stdio serving loop: one engine request line in, one response line out.
 *
 * The session object is the testable core; main() wires it to stdin and
 * stdout.  An unparsable model reply is retried up to `retries` times,
 * after which the bridge answers an explicit error object -- the engine
 * treats that as a protocol violation and aborts the match, which is the
 * intended failure mode.
 *
 * Usage:
 *   node dist/serve.js [--variant myopic|horizon|cooperative]
 *                      [--backend br|scripted|http] [--script JSON_LIST]
 *                      [--session-log FILE] [--retries N]
 */
import { createInterface } from "node:readline";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { createBackend, type Backend } from "./backends.js";
import { ActionParseError, parseAction } from "./parse.js";
import { renderRoundPrompt, type Variant, VARIANTS } from "./prompts.js";
import { requestSchema, responseSchema } from "./schema.js";
import { SessionLog, stripOutputLine } from "./session.js";

export interface SessionOptions {
  variant: Variant;
  backend: Backend;
  retries?: number;
  log?: SessionLog;
}

export class BridgeSession {
  private readonly retries: number;
  readonly log: SessionLog;

  constructor(private readonly options: SessionOptions) {
    this.retries = options.retries ?? 3;
    this.log = options.log ?? new SessionLog();
  }

  /** Handle one raw request line; always returns one response line. */
  async handleLine(line: string): Promise<string> {
    let request;
    try {
      request = requestSchema.parse(JSON.parse(line));
    } catch (err) {
      return JSON.stringify({ error: `bad request: ${String(err)}` });
    }
    const prompt = renderRoundPrompt(this.options.variant, request);
    let reply = "";
    for (let attempt = 1; attempt <= this.retries; attempt += 1) {
      try {
        reply = await this.options.backend.complete(prompt, request);
        const action = parseAction(reply);
        const cot = stripOutputLine(reply);
        const rationale = cot.split("\n").at(-1)?.slice(0, 240);
        const response = responseSchema.parse({ action, rationale });
        this.log.append({
          match_id: request.match_id,
          agent_index: request.agent_index,
          round: request.round,
          prompt,
          reply,
          cot,
          action,
          attempts: attempt,
        });
        return JSON.stringify(response);
      } catch (err) {
        if (!(err instanceof ActionParseError) && attempt === this.retries) {
          throw err;
        }
      }
    }
    const error = `no parsable action after ${this.retries} attempts`;
    this.log.append({
      match_id: request.match_id,
      agent_index: request.agent_index,
      round: request.round,
      prompt,
      reply,
      cot: stripOutputLine(reply),
      action: null,
      attempts: this.retries,
      error,
    });
    return JSON.stringify({ error });
  }
}

export async function main(argv = process.argv.slice(2)): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      variant: { type: "string", default: "cooperative" },
      backend: { type: "string", default: "br" },
      script: { type: "string" },
      "session-log": { type: "string" },
      retries: { type: "string", default: "3" },
    },
  });
  const variant = values.variant as Variant;
  if (!VARIANTS.includes(variant)) {
    throw new Error(`unknown variant ${JSON.stringify(values.variant)}`);
  }
  const script = values.script
    ? (JSON.parse(values.script) as number[])
    : undefined;
  const session = new BridgeSession({
    variant,
    backend: createBackend(values.backend as string, { script }),
    retries: Number(values.retries),
    log: new SessionLog(values["session-log"]),
  });
  const lines = createInterface({ input: process.stdin, terminal: false });
  for await (const line of lines) {
    if (line.trim() === "") {
      continue;
    }
    process.stdout.write((await session.handleLine(line)) + "\n");
  }
}

const entryPoint = process.argv[1];
if (entryPoint && import.meta.url === pathToFileURL(entryPoint).href) {
  main().catch((err) => {
    process.stderr.write(`fatal: ${String(err)}\n`);
    process.exit(1);
  });
}
