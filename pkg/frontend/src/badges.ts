/** Describe-back badges: compare the keywords recovered from a generated
 * motion's description against the keywords of the prompt that produced it. */

import type { Lexicon } from "./api.js";
import { detectChips, type KeywordField } from "./keywords.js";

export type BadgeKind = "match" | "mismatch" | "missing";

export interface Badge {
  field: KeywordField;
  promptLabel: string;
  describedLabel: string | null;
  kind: BadgeKind;
}

/** First recovered label per field from a free-text description. */
export function recoveredLabels(
  lexicon: Lexicon,
  text: string,
): Partial<Record<KeywordField, string>> {
  const out: Partial<Record<KeywordField, string>> = {};
  for (const chip of detectChips(lexicon, text)) {
    if (!(chip.field in out)) out[chip.field] = chip.label;
  }
  return out;
}

/** One badge per keyword field present in the prompt. */
export function describeBackBadges(
  lexicon: Lexicon,
  prompt: string,
  description: string,
): Badge[] {
  const promptLabels = recoveredLabels(lexicon, prompt);
  const described = recoveredLabels(lexicon, description);
  const badges: Badge[] = [];
  for (const field of ["emotion", "intensity", "motion"] as KeywordField[]) {
    const want = promptLabels[field];
    if (want === undefined) continue;
    const got = described[field] ?? null;
    badges.push({
      field,
      promptLabel: want,
      describedLabel: got,
      kind: got === null ? "missing" : got === want ? "match" : "mismatch",
    });
  }
  return badges;
}
