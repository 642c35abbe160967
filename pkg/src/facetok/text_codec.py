"""Word-level vocabulary with reserved special and geometry-token id ranges.

Layout: PAD=0 BOS=1 EOS=2 SEP=3 UNK=4 MOT_BEGIN=5 MOT_END=6, then text
word ids in [7, 7+W) sorted lexicographically, then K geometry ids.
"""

import json
import re
from pathlib import Path

PAD, BOS, EOS, SEP, UNK, MOT_BEGIN, MOT_END = range(7)
N_SPECIALS = 7
SPECIAL_NAMES = ["<pad>", "<bos>", "<eos>", "<sep>", "<unk>", "<mot>", "</mot>"]

_WORD_RE = re.compile(r"[a-z0-9']+")

# Fixed question bank used by Motion2Language instruction tuning; included
# here so the vocabulary always covers it.
QUESTION_BANK = [
    "describe the expression and head motion",
    "what emotion does the face show",
    "how is the head moving",
    "summarize the facial behavior in one sentence",
    "what is the person doing with their face",
]


def normalize(text):
    """Lowercase, split on whitespace/punctuation, drop the punctuation."""
    return _WORD_RE.findall(text.lower())


class Vocabulary:
    def __init__(self, words, k_geometry=512):
        self.words = list(words)
        self.k_geometry = k_geometry
        self.word_to_id = {w: N_SPECIALS + i for i, w in enumerate(self.words)}
        self.text_end = N_SPECIALS + len(self.words)  # geometry ids start here

    @property
    def size(self):
        return self.text_end + self.k_geometry

    def geometry_id(self, token):
        if not 0 <= token < self.k_geometry:
            raise ValueError(f"geometry token {token} outside [0, {self.k_geometry})")
        return self.text_end + token

    def geometry_token(self, vocab_id):
        if not self.is_geometry(vocab_id):
            raise ValueError(f"id {vocab_id} is not in the geometry range")
        return vocab_id - self.text_end

    def is_geometry(self, vocab_id):
        return self.text_end <= vocab_id < self.size

    def is_text(self, vocab_id):
        return N_SPECIALS <= vocab_id < self.text_end

    def encode_text(self, text):
        return [self.word_to_id.get(w, UNK) for w in normalize(text)]

    def decode_text(self, ids):
        out = []
        for i in ids:
            if i == UNK:
                out.append("<unk>")
            elif self.is_text(i):
                out.append(self.words[i - N_SPECIALS])
            elif 0 <= i < N_SPECIALS:
                continue  # specials are dropped from surface text
            elif self.is_geometry(i):
                raise ValueError(f"geometry id {i} in text decode")
            else:
                raise ValueError(f"id {i} outside every vocabulary range")
        return " ".join(out)

    def save(self, path):
        with open(path, "w") as f:
            json.dump({"words": self.words, "k_geometry": self.k_geometry}, f)

    @staticmethod
    def load(path):
        with open(path) as f:
            d = json.load(f)
        return Vocabulary(d["words"], d["k_geometry"])


def build_vocab(corpus_dir, k_geometry=512, extra_texts=()):
    """Deterministic vocabulary over corpus prompts, paraphrases, and the
    question bank; words sorted lexicographically before id assignment."""
    words = set()
    prompts = Path(corpus_dir) / "prompts.jsonl"
    with open(prompts) as f:
        for line in f:
            rec = json.loads(line)
            words.update(normalize(rec["text"]))
            for p in rec["paraphrases"]:
                words.update(normalize(p))
    for q in QUESTION_BANK:
        words.update(normalize(q))
    for t in extra_texts:
        words.update(normalize(t))
    return Vocabulary(sorted(words), k_geometry)


def extract_keywords(keyword_map, text):
    """First keyword match per field over the normalized word stream."""
    found = {}
    for w in normalize(text):
        hit = keyword_map.get(w)
        if hit is not None and hit[0] not in found:
            found[hit[0]] = hit[1]
    return found
