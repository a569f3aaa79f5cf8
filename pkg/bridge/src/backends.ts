/**
 * Model backends.
 *
 * Two deterministic mocks cover CI: a best-responder (plays the one-shot
 * optimum against the latest opponent total) and a scripted player (fixed
 * per-round actions, best response beyond the script).  Both phrase their
 * replies like a chatty model and end with the "Output:" line so the
 * parsing path is always exercised.
 *
 * A real HTTP backend is available opt-in through environment variables
 * (LLM_BRIDGE_API_URL, optional LLM_BRIDGE_API_KEY / LLM_BRIDGE_MODEL);
 * it POSTs {model, prompt} and expects {text}.  It is never used in tests.
 */
import type { EngineRequest } from "./schema.js";

export interface Backend {
  readonly kind: string;
  complete(prompt: string, request: EngineRequest): Promise<string>;
}

export function bestResponseAction(request: EngineRequest): number {
  const { kind, valuation, capacity } = request.game;
  const totals = request.observation.opponent_totals;
  if (totals.length === 0) {
    // Opening round: the symmetric guess from the own parameter alone.
    return kind === "cournot" ? valuation / 3 : (valuation * capacity) / 4;
  }
  const w = totals[totals.length - 1] ?? 0;
  if (kind === "cournot") {
    return Math.max(0, (valuation - w) / 2);
  }
  if (w <= 0) {
    return 1e-3;
  }
  return Math.max(1e-3, Math.sqrt(valuation * capacity * w) - w);
}

function outputLine(request: EngineRequest, action: number): string {
  return `Output: x_${request.agent_index + 1} = ${action}`;
}

export function createBestResponseBackend(): Backend {
  return {
    kind: "mock-best-response",
    async complete(_prompt, request) {
      const totals = request.observation.opponent_totals;
      const action = bestResponseAction(request);
      const seen =
        totals.length === 0
          ? "No history yet; I open at my one-shot symmetric point."
          : `Opponents totalled ${totals[totals.length - 1]} last round.`;
      return [
        `Results Analysis: round ${request.round} of ${request.horizon}. ${seen}`,
        `The Move: I maximize this round's profit alone.`,
        outputLine(request, action),
      ].join("\n");
    },
  };
}

export function createScriptedBackend(script: readonly number[]): Backend {
  if (script.some((a) => !Number.isFinite(a) || a < 0)) {
    throw new Error("scripted actions must be finite and non-negative");
  }
  return {
    kind: "mock-scripted",
    async complete(_prompt, request) {
      const planned = script[request.round - 1];
      const action = planned ?? bestResponseAction(request);
      const move =
        planned !== undefined
          ? "The Move (Hold the Line): I commit to my planned level to keep the cooperation signal credible."
          : "The Move: past the script; I fall back to the one-shot best response.";
      return [
        `Results Analysis: round ${request.round} of ${request.horizon}, following the plan.`,
        move,
        outputLine(request, action),
      ].join("\n");
    },
  };
}

export function createHttpBackend(env: NodeJS.ProcessEnv = process.env): Backend {
  const url = env.LLM_BRIDGE_API_URL;
  if (!url) {
    throw new Error("LLM_BRIDGE_API_URL is not set; http backend is opt-in");
  }
  const model = env.LLM_BRIDGE_MODEL ?? "default";
  const key = env.LLM_BRIDGE_API_KEY;
  return {
    kind: "http",
    async complete(prompt) {
      const headers: Record<string, string> = {
        "content-type": "application/json",
      };
      if (key) {
        headers.authorization = `Bearer ${key}`;
      }
      const res = await fetch(url, {
        method: "POST",
        headers,
        body: JSON.stringify({ model, prompt }),
      });
      if (!res.ok) {
        throw new Error(`backend HTTP ${res.status}`);
      }
      const body = (await res.json()) as { text?: unknown };
      if (typeof body.text !== "string") {
        throw new Error("backend reply missing text field");
      }
      return body.text;
    },
  };
}

export function createBackend(
  name: string,
  options: { script?: readonly number[] } = {},
): Backend {
  switch (name) {
    case "br":
      return createBestResponseBackend();
    case "scripted":
      return createScriptedBackend(options.script ?? []);
    case "http":
      return createHttpBackend();
    default:
      throw new Error(`unknown backend ${JSON.stringify(name)}`);
  }
}
