/**
 * Prompt templates for the three strategy framings, rendered per game.
 *
 * Templates live as text files under prompts/ with {token} placeholders.
 * Rendering is deterministic and golden-tested; an unresolved token after
 * substitution is an error (it means a parameter was missing).
 */
import { readFileSync } from "node:fs";

import type { EngineRequest, GameBlock } from "./schema.js";

export type Variant = "myopic" | "horizon" | "cooperative";

export const VARIANTS: readonly Variant[] = ["myopic", "horizon", "cooperative"];

export class RenderError extends Error {}

export interface PromptParams {
  /** Zero-based agent index as used on the wire. */
  agentIndex: number;
  nAgents: number;
  horizon: number;
  game: GameBlock;
}

const templateCache = new Map<Variant, string>();

function loadTemplate(variant: Variant): string {
  let text = templateCache.get(variant);
  if (text === undefined) {
    const url = new URL(`../prompts/${variant}.txt`, import.meta.url);
    text = readFileSync(url, "utf8");
    templateCache.set(variant, text);
  }
  return text;
}

/** Drop a trailing ".0" so valuations read like the boxes: 15 not 15.0. */
function num(value: number): string {
  return String(value);
}

interface GameWording {
  title: string;
  noun: string;
  verb: string;
  does: string;
  benefit: string;
  insight: string;
  parameters: (i: string, game: GameBlock) => string;
}

const WORDING: Record<GameBlock["kind"], GameWording> = {
  kelly: {
    title: "Resource Allocation Game",
    noun: "bid",
    verb: "bidding",
    does: "bids",
    benefit: "save money",
    insight:
      "If you and your opponents lower your bids by the same factor, your " +
      "resource allocation remains the same, but your cost drops " +
      "significantly. This creates much higher Net Utility for all of you.",
    parameters: (i, game) => {
      const scale =
        game.capacity === 1
          ? num(game.valuation)
          : `${num(game.valuation)} * ${num(game.capacity)}`;
      const share =
        game.capacity === 1
          ? `x_${i} / (x_${i} + X_-${i})`
          : `${num(game.capacity)} * x_${i} / (x_${i} + X_-${i})`;
      return [
        `1. Utility Function: U_${i}(d_${i}) = ${num(game.valuation)} * d_${i}`,
        `2. Allocation Rule: You receive resource d_${i} = ${share}.`,
        `3. Net Profit Formula: pi_${i} = (${scale} * x_${i}) / (x_${i} + X_-${i}) - x_${i}`,
      ].join("\n");
    },
  },
  cournot: {
    title: "Quantity Competition Game",
    noun: "quantity",
    verb: "producing",
    does: "produces",
    benefit: "keep the price high",
    insight:
      "If you and your opponents lower your quantities by the same amount, " +
      "the market price rises faster than your sales fall. This creates " +
      "much higher Net Utility for all of you.",
    parameters: (i, game) => [
      `1. Valuation: b_${i} = ${num(game.valuation)}, Total Quantity: X = x_${i} + X_-${i}`,
      `2. Net Profit Formula: pi_${i} = b_${i} * x_${i} - x_${i} * X`,
    ].join("\n"),
  },
};

export function renderSystemPrompt(variant: Variant, params: PromptParams): string {
  const wording = WORDING[params.game.kind];
  const i = String(params.agentIndex + 1);
  const substitutions: Record<string, string> = {
    i,
    n: String(params.nAgents),
    t: String(params.horizon),
    game_title: wording.title,
    action_noun: wording.noun,
    action_verb: wording.verb,
    action_does: wording.does,
    benefit: wording.benefit,
    insight: wording.insight,
    parameters: wording.parameters(i, params.game),
  };
  const rendered = loadTemplate(variant).replace(
    /\{([a-z_]+)\}/g,
    (token, name: string) => substitutions[name] ?? token,
  );
  const unresolved = rendered.match(/\{[a-z_]+\}/);
  if (unresolved) {
    throw new RenderError(`unresolved template token ${unresolved[0]}`);
  }
  return rendered.trimEnd();
}

/** History digest plus the output instruction appended to every round. */
export function renderRoundPrompt(variant: Variant, request: EngineRequest): string {
  const wording = WORDING[request.game.kind];
  const i = String(request.agent_index + 1);
  const system = renderSystemPrompt(variant, {
    agentIndex: request.agent_index,
    nAgents: request.observation.n_agents ?? 2,
    horizon: request.horizon,
    game: request.game,
  });
  const obs = request.observation;
  const lines: string[] = [system, "", `Round ${request.round} of ${request.horizon}.`];
  if (obs.own_actions.length === 0) {
    lines.push("History: (none yet -- this is the opening round)");
  } else {
    lines.push("History:");
    for (let r = 0; r < obs.own_actions.length; r += 1) {
      const opp =
        obs.mode === "open" && obs.opponent_actions
          ? `opponent ${wording.noun}s ${JSON.stringify(obs.opponent_actions[r])}`
          : `opponents total ${obs.opponent_totals[r]}`;
      lines.push(
        `  round ${r + 1}: your ${wording.noun} ${obs.own_actions[r]}, ` +
          `${opp}, price ${obs.prices[r]}, profit ${obs.own_payoffs[r]}`,
      );
    }
  }
  lines.push(
    "",
    `Respond with your reasoning, then a final line of the form: Output: x_${i} = <number>`,
  );
  return lines.join("\n");
}
