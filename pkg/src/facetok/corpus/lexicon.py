"""Label registry for the procedural prompt-motion corpus.

16 emotion archetypes x 3 intensities x 6 head-motion patterns = 288 label
cells. Archetype directions are the canonical expression axes mixed by a
fixed seeded rotation, so no two archetypes share a direction and none
coincides with a single micro-expression component.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

LEXICON_VERSION = 1
LEXICON_SEED = 2024

EMOTION_SURFACES = [
    # (name, base form, gerund-ish form usable after "is ...")
    ("happy", "happy", "happy"),
    ("sad", "sad", "sad"),
    ("angry", "angry", "angry"),
    ("surprised", "surprised", "surprised"),
    ("fearful", "fearful", "fearful"),
    ("disgusted", "disgusted", "disgusted"),
    ("contemptuous", "contemptuous", "contemptuous"),
    ("neutral", "neutral", "neutral"),
    ("pout", "pout", "pouting"),
    ("smirk", "smirk", "smirking"),
    ("grin", "grin", "grinning"),
    ("frown", "frown", "frowning"),
    ("squint", "squint", "squinting"),
    ("skeptical", "skeptical", "skeptical"),
    ("worried", "worried", "worried"),
    ("focused", "focused", "focused"),
]

INTENSITIES = ["low", "medium", "high"]
INTENSITY_ADVERBS = {"low": "slightly", "medium": "moderately", "high": "intensely"}
INTENSITY_ADJECTIVES = {"low": "slight", "medium": "moderate", "high": "intense"}
INTENSITY_AMPLITUDE = {"low": 0.5, "medium": 1.0, "high": 1.8}

SUBJECTS = [
    "a young woman",
    "a young man",
    "an older woman",
    "an older man",
    "a teenager",
    "a performer",
]


@dataclass(frozen=True)
class EmotionArchetype:
    name: str
    direction: np.ndarray  # unit vector in expression space
    base_amplitude: float
    base_word: str
    gerund_word: str


@dataclass(frozen=True)
class HeadMotionPattern:
    name: str
    axis: str  # yaw | pitch | roll
    amplitude: float  # radians, <= 0.5
    frequency: float  # Hz, oscillating patterns only
    # turns ramp to a held angle instead of oscillating; sign picks the side
    ramp: bool = False
    sign: float = 1.0
    gerund_phrase: str = ""


@dataclass(frozen=True)
class MicroExpression:
    name: str
    component_index: int
    pulse_width: int  # frames, in [2, 6]
    rate: float  # events per second
    amplitude: float
    phrase: str = ""


@dataclass(frozen=True)
class ClipLabels:
    emotion: str
    intensity: str
    motion: str
    micro: tuple = ()
    subject: str = SUBJECTS[0]


@dataclass
class Lexicon:
    expr_dim: int
    archetypes: list
    patterns: list
    micros: list
    keyword_map: dict = field(default_factory=dict)  # surface word -> (field, label)

    def archetype(self, name):
        return self._by_name(self.archetypes, name)

    def pattern(self, name):
        return self._by_name(self.patterns, name)

    def micro(self, name):
        return self._by_name(self.micros, name)

    @staticmethod
    def _by_name(items, name):
        for it in items:
            if it.name == name:
                return it
        raise KeyError(name)

    @property
    def emotion_names(self):
        return [a.name for a in self.archetypes]

    @property
    def pattern_names(self):
        return [p.name for p in self.patterns]

    def validate_labels(self, labels):
        self.archetype(labels.emotion)
        self.pattern(labels.motion)
        if labels.intensity not in INTENSITIES:
            raise KeyError(labels.intensity)
        for m in labels.micro:
            self.micro(m)

    def content_hash(self):
        payload = {
            "version": LEXICON_VERSION,
            "expr_dim": self.expr_dim,
            "archetypes": [
                [a.name, a.base_amplitude, a.base_word, a.gerund_word, [float(x) for x in a.direction]]
                for a in self.archetypes
            ],
            "patterns": [
                [p.name, p.axis, p.amplitude, p.frequency, p.ramp, p.sign, p.gerund_phrase]
                for p in self.patterns
            ],
            "micros": [
                [m.name, m.component_index, m.pulse_width, m.rate, m.amplitude, m.phrase]
                for m in self.micros
            ],
            "keywords": sorted(self.keyword_map.items()),
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def build_lexicon(expr_dim=16):
    """Deterministic lexicon; a pure function of expr_dim."""
    n = len(EMOTION_SURFACES)
    if expr_dim < n:
        raise ValueError(f"expr_dim must be >= {n} to host the archetype directions")
    rng = np.random.default_rng(LEXICON_SEED)
    # Mix the first n canonical axes by a fixed rotation (QR of a Gaussian draw):
    # rows stay orthonormal, so pairwise |cos| = 0 < 0.5.
    q, r = np.linalg.qr(rng.standard_normal((expr_dim, expr_dim)))
    q *= np.sign(np.diag(r))  # sign-fix so the decomposition is unique
    archetypes = [
        EmotionArchetype(
            name=name,
            direction=q[i].copy(),
            base_amplitude=1.0,
            base_word=base,
            gerund_word=ger,
        )
        for i, (name, base, ger) in enumerate(EMOTION_SURFACES)
    ]

    patterns = [
        HeadMotionPattern("still", "yaw", 0.0, 0.0, gerund_phrase="staying still"),
        HeadMotionPattern("nod", "pitch", 0.25, 1.0, gerund_phrase="nodding"),
        HeadMotionPattern("shake", "yaw", 0.30, 0.8, gerund_phrase="shaking the head"),
        HeadMotionPattern("tilt", "roll", 0.20, 0.5, gerund_phrase="tilting the head"),
        HeadMotionPattern("turn_left", "yaw", 0.35, 0.3, ramp=True, sign=1.0, gerund_phrase="turning leftward"),
        HeadMotionPattern("turn_right", "yaw", 0.35, 0.3, ramp=True, sign=-1.0, gerund_phrase="turning rightward"),
    ]

    micros = [
        MicroExpression("blink", expr_dim - 3, 3, 0.8, 0.4, phrase="occasional blinking"),
        MicroExpression("brow_raise", expr_dim - 2, 5, 0.4, 0.4, phrase="brief raising of the brows"),
        MicroExpression("lip_twitch", expr_dim - 1, 2, 0.6, 0.4, phrase="small twitches of the lips"),
    ]

    keyword_map = {}
    for a in archetypes:
        keyword_map[a.base_word] = ("emotion", a.name)
        keyword_map[a.gerund_word] = ("emotion", a.name)
    for level in INTENSITIES:
        keyword_map[INTENSITY_ADVERBS[level]] = ("intensity", level)
        keyword_map[INTENSITY_ADJECTIVES[level]] = ("intensity", level)
    keyword_map.update(
        {
            "still": ("motion", "still"),
            "nodding": ("motion", "nod"),
            "nod": ("motion", "nod"),
            "shaking": ("motion", "shake"),
            "shake": ("motion", "shake"),
            "tilting": ("motion", "tilt"),
            "tilt": ("motion", "tilt"),
            "leftward": ("motion", "turn_left"),
            "rightward": ("motion", "turn_right"),
        }
    )

    return Lexicon(
        expr_dim=expr_dim,
        archetypes=archetypes,
        patterns=patterns,
        micros=micros,
        keyword_map=keyword_map,
    )
