/** Keyword chips: detect lexicon surface words in a prompt and build
 * single-word what-if replacements. Pure functions, unit-tested. */

import type { Lexicon } from "./api.js";

export type KeywordField = "emotion" | "intensity" | "motion";

export interface Chip {
  word: string; // surface word as it appears in the prompt
  field: KeywordField;
  label: string; // canonical label (e.g. "grin", "high", "nod")
  alternatives: string[]; // surface words that may replace this one
  index: number; // word index within the tokenized prompt
}

interface SurfaceEntry {
  field: KeywordField;
  label: string;
  group: string[]; // interchangeable surface words for the same slot
}

/** Surface word -> field/label/alternative-group, from the service lexicon. */
export function surfaceMap(lexicon: Lexicon): Map<string, SurfaceEntry> {
  const map = new Map<string, SurfaceEntry>();
  const baseWords = lexicon.emotions.map((e) => e.base_word);
  const gerunds = lexicon.emotions.map((e) => e.gerund);
  lexicon.emotions.forEach((e, i) => {
    map.set(e.base_word, { field: "emotion", label: e.name, group: baseWords.slice() });
    map.set(e.gerund, { field: "emotion", label: e.name, group: gerunds.slice() });
    void i;
  });
  const adverbs = lexicon.intensities.map((s) => s.adverb);
  const adjectives = lexicon.intensities.map((s) => s.adjective);
  for (const s of lexicon.intensities) {
    map.set(s.adverb, { field: "intensity", label: s.name, group: adverbs.slice() });
    map.set(s.adjective, { field: "intensity", label: s.name, group: adjectives.slice() });
  }
  // Motion slots are multi-word gerund phrases; chip the distinctive head word.
  const motionHeads = lexicon.motions.map((m) => motionHeadWord(m.gerund_phrase));
  lexicon.motions.forEach((m, i) => {
    map.set(motionHeads[i], { field: "motion", label: m.name, group: motionHeads.slice() });
  });
  return map;
}

function motionHeadWord(phrase: string): string {
  // The single word that identifies the pattern: "turning leftward" ->
  // "leftward", "staying still" -> "still", otherwise the gerund itself
  // ("nodding", "shaking the head" -> "shaking").
  const words = tokenizeWords(phrase);
  const direction = words.find((w) => w.endsWith("ward"));
  if (direction) return direction;
  if (words[0] === "staying" && words.length > 1) return words[1];
  return words[0];
}

export function tokenizeWords(text: string): string[] {
  return text
    .toLowerCase()
    .replace(/[^a-z' -]/g, " ")
    .split(/[\s-]+/)
    .filter((w) => w.length > 0);
}

/** Chips for every lexicon keyword occurring in the prompt (first hit per
 * word position; a well-formed prompt has one chip per field). */
export function detectChips(lexicon: Lexicon, prompt: string): Chip[] {
  const map = surfaceMap(lexicon);
  const chips: Chip[] = [];
  tokenizeWords(prompt).forEach((word, index) => {
    const entry = map.get(word);
    if (entry) {
      chips.push({
        word,
        field: entry.field,
        label: entry.label,
        alternatives: entry.group.filter((w) => w !== word),
        index,
      });
    }
  });
  return chips;
}

/** Replace exactly one occurrence of the chip's word with the given
 * alternative, preserving every other character of the prompt. Throws if the
 * replacement is not a legal alternative for this chip. */
export function replaceKeyword(prompt: string, chip: Chip, replacement: string): string {
  if (replacement !== chip.word && !chip.alternatives.includes(replacement)) {
    throw new Error(`"${replacement}" is not a ${chip.field} alternative`);
  }
  const pattern = new RegExp(`\\b${chip.word}\\b`);
  if (!pattern.test(prompt.toLowerCase())) {
    throw new Error(`keyword "${chip.word}" not found in prompt`);
  }
  const start = prompt.toLowerCase().search(pattern);
  return prompt.slice(0, start) + replacement + prompt.slice(start + chip.word.length);
}

/** Word-level diff: indices where the two prompts differ. */
export function wordDiff(a: string, b: string): number[] {
  const wa = tokenizeWords(a);
  const wb = tokenizeWords(b);
  const out: number[] = [];
  const n = Math.max(wa.length, wb.length);
  for (let i = 0; i < n; i++) {
    if (wa[i] !== wb[i]) out.push(i);
  }
  return out;
}
