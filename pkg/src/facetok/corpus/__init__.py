from .dataset import (
    ClipRecord,
    LabelSampler,
    generate_corpus,
    load_corpus,
    load_manifest,
    read_frames,
    write_frames,
)
from .lexicon import (
    INTENSITIES,
    INTENSITY_AMPLITUDE,
    SUBJECTS,
    ClipLabels,
    EmotionArchetype,
    HeadMotionPattern,
    Lexicon,
    MicroExpression,
    build_lexicon,
)
from .prompts import TEMPLATES, PromptRecord, render_prompt
from .trajectory import envelope, smooth_noise, synth_trajectory

__all__ = [
    "ClipRecord",
    "LabelSampler",
    "generate_corpus",
    "load_corpus",
    "load_manifest",
    "read_frames",
    "write_frames",
    "INTENSITIES",
    "INTENSITY_AMPLITUDE",
    "SUBJECTS",
    "ClipLabels",
    "EmotionArchetype",
    "HeadMotionPattern",
    "Lexicon",
    "MicroExpression",
    "build_lexicon",
    "TEMPLATES",
    "PromptRecord",
    "render_prompt",
    "envelope",
    "smooth_noise",
    "synth_trajectory",
]
