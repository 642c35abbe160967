"""Templated natural-language prompts with paraphrases.

Five surface templates with different field orderings; each realization
carries the emotion, intensity, and motion keyword exactly once, so a
keyword scan recovers the generating labels.
"""

from dataclasses import dataclass

from .lexicon import INTENSITY_ADJECTIVES, INTENSITY_ADVERBS


@dataclass(frozen=True)
class PromptRecord:
    clip_id: str
    text: str
    paraphrases: tuple
    labels: object  # ClipLabels


def _surfaces(lexicon, labels):
    arch = lexicon.archetype(labels.emotion)
    pat = lexicon.pattern(labels.motion)
    return {
        "subject": labels.subject,
        "emo_base": arch.base_word,
        "emo_ger": arch.gerund_word,
        "int_adv": INTENSITY_ADVERBS[labels.intensity],
        "int_adj": INTENSITY_ADJECTIVES[labels.intensity],
        "mot_ger": pat.gerund_phrase,
    }


TEMPLATES = [
    "{subject} is {int_adv} {emo_ger} while {mot_ger}{micro}.",
    "{int_adv} {emo_ger} and {mot_ger}, {subject} holds the mood{micro}.",
    "{subject} shows a {int_adj} {emo_base} expression, {mot_ger}{micro}.",
    "while {mot_ger}, {subject} looks {int_adv} {emo_ger}{micro}.",
    "{subject} keeps {mot_ger}, wearing a {int_adj} {emo_base} look{micro}.",
]


def realize(lexicon, labels, template_index, include_micro=True):
    s = _surfaces(lexicon, labels)
    micro = ""
    if include_micro and labels.micro:
        phrases = [lexicon.micro(m).phrase for m in labels.micro]
        micro = ", with " + " and ".join(phrases)
    return TEMPLATES[template_index].format(micro=micro, **s)


def render_prompt(lexicon, labels, clip_id, rng, n_paraphrases=3):
    """Main text from one template, paraphrases from distinct other templates."""
    order = rng.permutation(len(TEMPLATES))
    text = realize(lexicon, labels, int(order[0]))
    paraphrases = tuple(
        realize(lexicon, labels, int(order[1 + i])) for i in range(n_paraphrases)
    )
    return PromptRecord(clip_id=clip_id, text=text, paraphrases=paraphrases, labels=labels)
