"""Corpus generation and persistence.

Layout under the corpus directory:
  manifest.json   - seed, counts, lexicon hash, split assignment, file index
  prompts.jsonl   - one {clip_id, text, paraphrases, labels, split} per line
  frames/<clip_id>.bin - magic "O3FV", version u32=1, frame_count u32,
                    expr_dim u32, then frame_count x (expr_dim+3) float32 LE
"""

import itertools
import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..face_model import MotionSequence
from .lexicon import INTENSITIES, SUBJECTS, ClipLabels, build_lexicon
from .prompts import PromptRecord, render_prompt
from .trajectory import MAX_LEN, MIN_LEN, NOISE_SIGMA, POSE_NOISE_SIGMA, synth_trajectory

MAGIC = b"O3FV"
FORMAT_VERSION = 1


@dataclass
class ClipRecord:
    prompt: PromptRecord
    motion: MotionSequence
    split: str = "train"

    @property
    def clip_id(self):
        return self.prompt.clip_id

    @property
    def labels(self):
        return self.prompt.labels


class LabelSampler:
    """Stratified round-robin over (emotion, intensity, motion) cells.

    Every block of 288 draws covers each cell exactly once, in a
    seeded per-block order; micro-expressions attach independently with
    probability 0.5 each; subjects are uniform.
    """

    def __init__(self, lexicon, rng):
        self.lexicon = lexicon
        self.rng = rng
        self.cells = list(
            itertools.product(lexicon.emotion_names, INTENSITIES, lexicon.pattern_names)
        )
        self._queue = []

    def sample(self):
        if not self._queue:
            order = self.rng.permutation(len(self.cells))
            self._queue = [self.cells[i] for i in order]
        emotion, intensity, motion = self._queue.pop()
        micro = tuple(
            m.name for m in self.lexicon.micros if self.rng.random() < 0.5
        )
        subject = SUBJECTS[self.rng.integers(0, len(SUBJECTS))]
        return ClipLabels(
            emotion=emotion, intensity=intensity, motion=motion, micro=micro, subject=subject
        )


def write_frames(path, motion):
    expr = motion.expr_matrix().astype("<f4")
    pose = motion.pose_matrix().astype("<f4")
    data = np.concatenate([expr, pose], axis=1)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<III", FORMAT_VERSION, data.shape[0], expr.shape[1]))
        f.write(data.tobytes())


def read_frames(path, clip_id=""):
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"not a corpus frame file: {path}")
    version, frame_count, expr_dim = struct.unpack("<III", raw[4:16])
    if version != FORMAT_VERSION:
        raise ValueError(f"unknown frame file version {version} in {path}")
    expected = 16 + frame_count * (expr_dim + 3) * 4
    if len(raw) != expected:
        raise ValueError(
            f"length mismatch in frames for clip {clip_id or path}: "
            f"expected {expected} bytes, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=16).reshape(frame_count, expr_dim + 3)
    return MotionSequence.from_arrays(data[:, :expr_dim], data[:, expr_dim:])


def _labels_to_json(labels):
    return {
        "emotion": labels.emotion,
        "intensity": labels.intensity,
        "motion": labels.motion,
        "micro": list(labels.micro),
        "subject": labels.subject,
    }


def _labels_from_json(d):
    return ClipLabels(
        emotion=d["emotion"],
        intensity=d["intensity"],
        motion=d["motion"],
        micro=tuple(d["micro"]),
        subject=d["subject"],
    )


def generate_corpus(out_dir, n_clips=2880, seed=11, splits=(0.8, 0.1, 0.1),
                    expr_dim=16, noise_sigma=NOISE_SIGMA,
                    pose_noise_sigma=POSE_NOISE_SIGMA, lexicon=None):
    """Generate and persist a balanced corpus; returns the manifest dict."""
    out_dir = Path(out_dir)
    (out_dir / "frames").mkdir(parents=True, exist_ok=True)
    lexicon = lexicon or build_lexicon(expr_dim)
    n_cells = 16 * 3 * 6
    if n_clips % n_cells != 0:
        warnings.warn(
            f"n_clips={n_clips} is not a multiple of {n_cells}; "
            "per-cell balance holds only modulo the remainder"
        )

    rng = np.random.default_rng(np.uint64(seed))
    sampler = LabelSampler(lexicon, rng)

    clips = []
    for i in range(n_clips):
        clip_id = f"clip{i:05d}"
        labels = sampler.sample()
        length = int(rng.integers(MIN_LEN, MAX_LEN + 1))
        motion = synth_trajectory(lexicon, labels, length, rng, noise_sigma=noise_sigma,
                                  pose_noise_sigma=pose_noise_sigma)
        prompt = render_prompt(lexicon, labels, clip_id, rng)
        write_frames(out_dir / "frames" / f"{clip_id}.bin", motion)
        clips.append((prompt, length))

    split_of = _assign_splits(clips, splits, rng)

    with open(out_dir / "prompts.jsonl", "w") as f:
        for prompt, _length in clips:
            rec = {
                "clip_id": prompt.clip_id,
                "text": prompt.text,
                "paraphrases": list(prompt.paraphrases),
                "labels": _labels_to_json(prompt.labels),
                "split": split_of[prompt.clip_id],
            }
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")

    emotion_counts = {}
    cell_counts = {}
    for prompt, _ in clips:
        lab = prompt.labels
        emotion_counts[lab.emotion] = emotion_counts.get(lab.emotion, 0) + 1
        key = f"{lab.emotion}|{lab.intensity}|{lab.motion}"
        cell_counts[key] = cell_counts.get(key, 0) + 1

    manifest = {
        "version": FORMAT_VERSION,
        "seed": seed,
        "n_clips": n_clips,
        "expr_dim": lexicon.expr_dim,
        "noise_sigma": noise_sigma,
        "pose_noise_sigma": pose_noise_sigma,
        "lexicon_version": 1,
        "lexicon_hash": lexicon.content_hash(),
        "emotion_counts": emotion_counts,
        "cell_counts": cell_counts,
        "splits": split_of,
        "files": {p.clip_id: f"frames/{p.clip_id}.bin" for p, _ in clips},
        "lengths": {p.clip_id: length for p, length in clips},
    }
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, sort_keys=True, separators=(",", ":"))
    return manifest


def _assign_splits(clips, splits, rng):
    """Seeded permutation stratified by emotion -> train/val/test labels."""
    by_emotion = {}
    for prompt, _ in clips:
        by_emotion.setdefault(prompt.labels.emotion, []).append(prompt.clip_id)
    split_of = {}
    for emotion in sorted(by_emotion):
        ids = by_emotion[emotion]
        order = rng.permutation(len(ids))
        n = len(ids)
        n_train = int(round(splits[0] * n))
        n_val = int(round(splits[1] * n))
        for rank, idx in enumerate(order):
            if rank < n_train:
                split = "train"
            elif rank < n_train + n_val:
                split = "val"
            else:
                split = "test"
            split_of[ids[idx]] = split
    return split_of


def load_manifest(corpus_dir):
    with open(Path(corpus_dir) / "manifest.json") as f:
        return json.load(f)


def load_corpus(corpus_dir, split=None):
    """ClipRecords for one split (or all); lossless vs generate_corpus output."""
    corpus_dir = Path(corpus_dir)
    if split is not None and split not in ("train", "val", "test"):
        raise ValueError(f"unknown split {split!r}; expected train/val/test")
    manifest = load_manifest(corpus_dir)
    records = []
    with open(corpus_dir / "prompts.jsonl") as f:
        for line in f:
            rec = json.loads(line)
            if split is not None and rec["split"] != split:
                continue
            clip_id = rec["clip_id"]
            motion = read_frames(corpus_dir / manifest["files"][clip_id], clip_id)
            prompt = PromptRecord(
                clip_id=clip_id,
                text=rec["text"],
                paraphrases=tuple(rec["paraphrases"]),
                labels=_labels_from_json(rec["labels"]),
            )
            records.append(ClipRecord(prompt=prompt, motion=motion, split=rec["split"]))
    return records
