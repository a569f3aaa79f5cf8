/** Shared request factories for the bridge tests. */
import type { EngineRequest, GameBlock } from "../src/schema.js";

export function cournotGame(valuation = 15): GameBlock {
  return { kind: "cournot", valuation, capacity: 1 };
}

export function kellyGame(valuation = 2, capacity = 1): GameBlock {
  return { kind: "kelly", valuation, capacity };
}

export interface RequestOverrides {
  game?: GameBlock;
  agentIndex?: number;
  round?: number;
  horizon?: number;
  ownActions?: number[];
  ownPayoffs?: number[];
  opponentTotals?: number[];
  prices?: number[];
  matchId?: string;
}

/** A well-formed open-observability request, round 1 by default. */
export function makeRequest(overrides: RequestOverrides = {}): EngineRequest {
  const own = overrides.ownActions ?? [];
  const totals = overrides.opponentTotals ?? own.map(() => 0);
  return {
    protocol_version: "1",
    match_id: overrides.matchId ?? "test-match",
    agent_index: overrides.agentIndex ?? 0,
    round: overrides.round ?? own.length + 1,
    horizon: overrides.horizon ?? 10,
    game: overrides.game ?? cournotGame(),
    observation: {
      mode: "open",
      own_actions: own,
      own_payoffs: overrides.ownPayoffs ?? own.map(() => 0),
      opponent_totals: totals,
      prices: overrides.prices ?? own.map((a, r) => a + (totals[r] ?? 0)),
      opponent_actions: totals.map((w) => [w]),
      n_agents: 2,
    },
  };
}
