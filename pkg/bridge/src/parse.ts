/**
 * Pull a numeric action out of a free-form model reply.
 *
 * Rule (documented and golden-tested): take the last occurrence of an
 * action marker -- "Output:", "bid", or "quantity" -- and return the last
 * numeric literal after it; if no marker is present, return the last
 * numeric literal in the whole reply.  The result must be finite and
 * non-negative.  "Output: x_1 = 0.1" therefore parses to 0.1 (the final
 * number wins over the subscript).
 */

const NUMBER = /-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?/g;
const MARKER = /output\s*:|\bbid\b|\bquantity\b/gi;

export class ActionParseError extends Error {}

function lastNumber(text: string): number | null {
  const matches = text.match(NUMBER);
  if (!matches || matches.length === 0) {
    return null;
  }
  return Number(matches[matches.length - 1]);
}

export function parseAction(reply: string): number {
  let markerEnd = -1;
  for (const match of reply.matchAll(MARKER)) {
    markerEnd = (match.index ?? 0) + match[0].length;
  }
  let value = markerEnd >= 0 ? lastNumber(reply.slice(markerEnd)) : null;
  if (value === null) {
    value = lastNumber(reply);
  }
  if (value === null) {
    throw new ActionParseError("no numeric action in reply");
  }
  if (!Number.isFinite(value) || value < 0) {
    throw new ActionParseError(`parsed action ${value} is not a valid action`);
  }
  return value;
}
