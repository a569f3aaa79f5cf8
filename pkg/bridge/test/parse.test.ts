import { describe, expect, it } from "vitest";

import { ActionParseError, parseAction } from "../src/parse.js";

describe("parseAction", () => {
  it("takes the last number after the Output marker", () => {
    expect(parseAction("Output: x_1 = 0.1")).toBe(0.1);
  });

  it("subscripts do not shadow the action", () => {
    expect(parseAction("thinking about 3 options\nOutput: x_2 = 4.5")).toBe(4.5);
  });

  it("handles the bid marker mid-sentence", () => {
    expect(parseAction("I bid x = 0.1 because the pool dropped")).toBe(0.1);
  });

  it("handles the quantity marker", () => {
    expect(parseAction("a quantity of 5.25 units feels right")).toBe(5.25);
  });

  it("uses the last marker when several appear", () => {
    const reply = [
      "Last round my bid was 0.5, a mistake.",
      "The Move: go lower.",
      "Output: x_1 = 0.1",
    ].join("\n");
    expect(parseAction(reply)).toBe(0.1);
  });

  it("falls back to the last number without any marker", () => {
    expect(parseAction("I think 3.75 is right, going with 4.0")).toBe(4.0);
  });

  it("accepts scientific notation", () => {
    expect(parseAction("Output: 1e-3")).toBe(0.001);
  });

  it("rejects a reply with no numbers", () => {
    expect(() => parseAction("hold the line")).toThrow(ActionParseError);
  });

  it("rejects a negative action", () => {
    expect(() => parseAction("Output: -2.5")).toThrow(ActionParseError);
  });

  it("marker inside a longer word does not count", () => {
    // "forbidden" contains the letters b-i-d but not as a word.
    expect(parseAction("raising is forbidden, so 3.5")).toBe(3.5);
  });
});
