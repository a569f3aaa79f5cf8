/**
 * Zod schemas for the engine's newline-delimited JSON wire protocol (v1).
 *
 * One request per round arrives on stdin; the bridge answers one response
 * line on stdout.  The request's game block carries this agent's own
 * market parameter only -- opponents' parameters are never disclosed.
 */
import { z } from "zod";

export const PROTOCOL_VERSION = "1";

export const observationSchema = z.object({
  mode: z.enum(["open", "aggregate"]),
  own_actions: z.array(z.number()),
  own_payoffs: z.array(z.number()),
  opponent_totals: z.array(z.number()),
  prices: z.array(z.number()),
  // Present only under open observability.
  opponent_actions: z.array(z.array(z.number())).optional(),
  n_agents: z.number().int().positive().optional(),
});

export const gameSchema = z.object({
  kind: z.enum(["kelly", "cournot"]),
  valuation: z.number().positive(),
  capacity: z.number().positive(),
});

export const requestSchema = z.object({
  protocol_version: z.literal(PROTOCOL_VERSION),
  match_id: z.string(),
  agent_index: z.number().int().nonnegative(),
  round: z.number().int().positive(),
  horizon: z.number().int().positive(),
  game: gameSchema,
  observation: observationSchema,
});

export const responseSchema = z.object({
  action: z.number().finite().nonnegative(),
  rationale: z.string().optional(),
});

export type Observation = z.infer<typeof observationSchema>;
export type GameBlock = z.infer<typeof gameSchema>;
export type EngineRequest = z.infer<typeof requestSchema>;
export type EngineResponse = z.infer<typeof responseSchema>;
