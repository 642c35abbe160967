import type { Lexicon } from "../src/api.js";

/** Miniature lexicon mirroring the /api/lexicon payload shape. */
export const LEXICON: Lexicon = {
  emotions: [
    { name: "grin", base_word: "grin", gerund: "grinning" },
    { name: "pout", base_word: "pout", gerund: "pouting" },
    { name: "frown", base_word: "frown", gerund: "frowning" },
  ],
  intensities: [
    { name: "low", adverb: "slightly", adjective: "slight", amplitude: 0.5 },
    { name: "medium", adverb: "moderately", adjective: "moderate", amplitude: 1.0 },
    { name: "high", adverb: "intensely", adjective: "intense", amplitude: 1.8 },
  ],
  motions: [
    { name: "still", axis: "yaw", gerund_phrase: "staying still" },
    { name: "nod", axis: "pitch", gerund_phrase: "nodding" },
    { name: "shake", axis: "yaw", gerund_phrase: "shaking the head" },
    { name: "turn_left", axis: "yaw", gerund_phrase: "turning leftward" },
    { name: "turn_right", axis: "yaw", gerund_phrase: "turning rightward" },
  ],
  subjects: ["a young woman", "a performer"],
  questions: ["what emotion and movement is shown"],
  k_geometry: 512,
};
