import { describe, expect, it } from "vitest";

import { describeBackBadges } from "../src/badges.js";
import { LEXICON } from "./fixtures.js";

type Expected = Record<string, string>;

function kinds(prompt: string, description: string): Expected {
  const out: Expected = {};
  for (const b of describeBackBadges(LEXICON, prompt, description)) {
    out[b.field] = b.kind;
  }
  return out;
}

/** Ten scripted cases with a manually computed keyword comparison each. */
const CASES: Array<{ prompt: string; description: string; expected: Expected }> = [
  {
    prompt: "a young woman is intensely grinning while nodding",
    description: "she is intensely grinning and nodding",
    expected: { emotion: "match", intensity: "match", motion: "match" },
  },
  {
    prompt: "a young woman is intensely grinning while nodding",
    description: "she is slightly grinning and nodding",
    expected: { emotion: "match", intensity: "mismatch", motion: "match" },
  },
  {
    prompt: "a young woman is intensely grinning while nodding",
    description: "she is intensely pouting and nodding",
    expected: { emotion: "mismatch", intensity: "match", motion: "match" },
  },
  {
    prompt: "a young woman is intensely grinning while nodding",
    description: "she is intensely grinning while shaking the head",
    expected: { emotion: "match", intensity: "match", motion: "mismatch" },
  },
  {
    prompt: "a young woman is intensely grinning while nodding",
    description: "a calm face",
    expected: { emotion: "missing", intensity: "missing", motion: "missing" },
  },
  {
    prompt: "a performer shows a slight pout expression, staying still",
    description: "a slight pout while staying still",
    expected: { emotion: "match", intensity: "match", motion: "match" },
  },
  {
    prompt: "a performer shows a slight pout expression, staying still",
    description: "an intense frown while turning leftward",
    expected: { emotion: "mismatch", intensity: "mismatch", motion: "mismatch" },
  },
  {
    prompt: "while turning leftward, she looks moderately frowning",
    description: "moderately frowning and turning rightward",
    expected: { emotion: "match", intensity: "match", motion: "mismatch" },
  },
  {
    prompt: "while turning leftward, she looks moderately frowning",
    description: "frowning while turning leftward",
    expected: { emotion: "match", intensity: "missing", motion: "match" },
  },
  {
    prompt: "a plain sentence with no keywords at all",
    description: "intensely grinning",
    expected: {}, // nothing to compare: no badges
  },
];

describe("describe-back badges", () => {
  it.each(CASES.map((c, i) => [i + 1, c] as const))(
    "scripted case %d matches the manual comparison",
    (_i, c) => {
      expect(kinds(c.prompt, c.description)).toEqual(c.expected);
    },
  );

  it("badge carries both labels for tooltips", () => {
    const badge = describeBackBadges(
      LEXICON,
      "intensely grinning",
      "slightly grinning",
    ).find((b) => b.field === "intensity");
    expect(badge).toMatchObject({
      field: "intensity",
      promptLabel: "high",
      describedLabel: "low",
      kind: "mismatch",
    });
  });
});
