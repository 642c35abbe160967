import { describe, expect, it } from "vitest";

import { detectChips, replaceKeyword, tokenizeWords, wordDiff } from "../src/keywords.js";
import { LEXICON } from "./fixtures.js";

const PROMPT = "a young woman is intensely grinning while nodding.";

describe("keyword chips", () => {
  it("detects one chip per keyword field in a standard prompt", () => {
    const chips = detectChips(LEXICON, PROMPT);
    expect(chips.map((c) => [c.field, c.label])).toEqual([
      ["intensity", "high"],
      ["emotion", "grin"],
      ["motion", "nod"],
    ]);
  });

  it("uses the distinctive word for multi-word motion phrases", () => {
    expect(detectChips(LEXICON, "she keeps staying still")[0]).toMatchObject({
      field: "motion",
      label: "still",
      word: "still",
    });
    expect(detectChips(LEXICON, "while turning leftward, she smiles")[0]).toMatchObject({
      field: "motion",
      label: "turn_left",
      word: "leftward",
    });
  });

  it("offers only same-field alternatives", () => {
    const [intensity] = detectChips(LEXICON, PROMPT);
    expect(intensity.alternatives).toEqual(["slightly", "moderately"]);
    const emotion = detectChips(LEXICON, PROMPT)[1];
    expect(emotion.alternatives).toEqual(["pouting", "frowning"]);
  });

  it("ignores words outside the lexicon", () => {
    expect(detectChips(LEXICON, "hello there general")).toEqual([]);
  });
});

describe("what-if replacement", () => {
  it("changes exactly one word, preserving everything else", () => {
    const [chip] = detectChips(LEXICON, PROMPT);
    const edited = replaceKeyword(PROMPT, chip, "slightly");
    expect(edited).toBe("a young woman is slightly grinning while nodding.");
    expect(wordDiff(PROMPT, edited)).toEqual([chip.index]);
  });

  it("rejects a replacement from another field", () => {
    const [chip] = detectChips(LEXICON, PROMPT); // intensity chip
    expect(() => replaceKeyword(PROMPT, chip, "pouting")).toThrow(/alternative/);
  });

  it("identical replacement returns the identical prompt", () => {
    const [chip] = detectChips(LEXICON, PROMPT);
    expect(replaceKeyword(PROMPT, chip, chip.word)).toBe(PROMPT);
  });

  it("replaces whole words only", () => {
    const chips = detectChips(LEXICON, "a slight grin, grinning slightly");
    const adjChip = chips.find((c) => c.word === "slight")!;
    const edited = replaceKeyword("a slight grin, grinning slightly", adjChip, "intense");
    expect(edited).toBe("a intense grin, grinning slightly");
  });
});

describe("word utilities", () => {
  it("tokenizes case-insensitively and strips punctuation", () => {
    expect(tokenizeWords("A Young WOMAN, nodding!")).toEqual([
      "a", "young", "woman", "nodding",
    ]);
  });

  it("wordDiff reports all differing positions", () => {
    expect(wordDiff("a b c", "a x c")).toEqual([1]);
    expect(wordDiff("a b", "a b c")).toEqual([2]);
    expect(wordDiff("same text", "same text")).toEqual([]);
  });
});
