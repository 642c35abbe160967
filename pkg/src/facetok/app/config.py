"""Run configuration: a single JSON document validated up front.

Validation collects every violation and reports them together, so a bad
config fails once with a complete list instead of one error per run.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class CorpusSection:
    n_clips: int = 2880
    seed: int = 11
    noise_sigma: float = 0.05
    pose_noise_sigma: float = 0.01
    splits: tuple = (0.8, 0.1, 0.1)


@dataclass
class FaceSection:
    n_vertices: int = 512
    expr_dim: int = 16
    seed: int = 7


@dataclass
class VqvaeSection:
    latent_dim: int = 64
    codebook_size: int = 512
    hidden: int = 128
    kernel_width: int = 5
    beta: float = 0.25
    lambda_pose: float = 1.0
    ema_decay: float = 0.99
    steps: int = 3000
    batch_size: int = 32
    lr: float = 1e-3
    crop_len: int = 100
    reseed_every: int = 100
    seed: int = 3
    cycle_steps: int = 6000
    cycle_lr: float = 3e-4
    cycle_decoder_lr: float = 3e-5


@dataclass
class LmSection:
    n_layers: int = 4
    n_heads: int = 4
    d_model: int = 128
    context: int = 320
    m2l_epochs: int = 10
    l2m_epochs: int = 10
    batch_size: int = 16
    lr: float = 3e-4
    seed: int = 5


@dataclass
class RunConfig:
    corpus: CorpusSection = field(default_factory=CorpusSection)
    face: FaceSection = field(default_factory=FaceSection)
    vqvae: VqvaeSection = field(default_factory=VqvaeSection)
    lm: LmSection = field(default_factory=LmSection)

    def to_dict(self):
        d = asdict(self)
        d["corpus"]["splits"] = list(self.corpus.splits)
        return d


_SECTIONS = {
    "corpus": CorpusSection,
    "face": FaceSection,
    "vqvae": VqvaeSection,
    "lm": LmSection,
}


def _check(errors, cond, msg):
    if not cond:
        errors.append(msg)


def validate_config(cfg):
    """Returns a list of human-readable violations (empty means valid)."""
    errors = []
    _check(errors, cfg.corpus.n_clips >= 1, "corpus.n_clips must be >= 1")
    _check(errors, cfg.corpus.noise_sigma >= 0, "corpus.noise_sigma must be >= 0")
    _check(errors, cfg.corpus.pose_noise_sigma >= 0, "corpus.pose_noise_sigma must be >= 0")
    _check(errors, len(cfg.corpus.splits) == 3, "corpus.splits must have 3 entries")
    if len(cfg.corpus.splits) == 3:
        _check(errors, all(s > 0 for s in cfg.corpus.splits), "corpus.splits must be positive")
        _check(errors, abs(sum(cfg.corpus.splits) - 1.0) < 1e-9, "corpus.splits must sum to 1")
    _check(errors, cfg.face.n_vertices >= 4, "face.n_vertices must be >= 4")
    _check(errors, cfg.face.expr_dim >= 1, "face.expr_dim must be >= 1")
    _check(errors, cfg.face.expr_dim <= 3 * cfg.face.n_vertices,
           "face.expr_dim must be <= 3 * face.n_vertices")
    _check(errors, cfg.vqvae.latent_dim >= 1, "vqvae.latent_dim must be >= 1")
    _check(errors, cfg.vqvae.codebook_size >= 2, "vqvae.codebook_size must be >= 2")
    _check(errors, cfg.vqvae.kernel_width % 2 == 1, "vqvae.kernel_width must be odd")
    _check(errors, 0 <= cfg.vqvae.beta, "vqvae.beta must be >= 0")
    _check(errors, 0 < cfg.vqvae.ema_decay < 1, "vqvae.ema_decay must be in (0, 1)")
    _check(errors, cfg.vqvae.steps >= 1, "vqvae.steps must be >= 1")
    _check(errors, cfg.vqvae.batch_size >= 1, "vqvae.batch_size must be >= 1")
    _check(errors, cfg.vqvae.lr > 0, "vqvae.lr must be > 0")
    _check(errors, cfg.vqvae.cycle_steps >= 0, "vqvae.cycle_steps must be >= 0")
    _check(errors, cfg.vqvae.cycle_lr > 0, "vqvae.cycle_lr must be > 0")
    _check(errors, cfg.vqvae.cycle_decoder_lr > 0, "vqvae.cycle_decoder_lr must be > 0")
    _check(errors, cfg.lm.d_model % max(1, cfg.lm.n_heads) == 0,
           "lm.d_model must be divisible by lm.n_heads")
    _check(errors, cfg.lm.n_layers >= 1, "lm.n_layers must be >= 1")
    _check(errors, cfg.lm.context >= 8, "lm.context must be >= 8")
    _check(errors, cfg.lm.lr > 0, "lm.lr must be > 0")
    _check(errors, cfg.lm.batch_size >= 1, "lm.batch_size must be >= 1")
    return errors


def config_from_dict(d):
    cfg = RunConfig()
    unknown = set(d) - set(_SECTIONS)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    for section, cls in _SECTIONS.items():
        if section not in d:
            continue
        sub = d[section]
        current = getattr(cfg, section)
        bad = set(sub) - set(cls.__dataclass_fields__)
        if bad:
            raise ValueError(f"unknown keys in config section {section}: {sorted(bad)}")
        for k, v in sub.items():
            if k == "splits":
                v = tuple(v)
            setattr(current, k, v)
    errors = validate_config(cfg)
    if errors:
        raise ValueError("invalid config:\n  " + "\n  ".join(errors))
    return cfg


def load_config(path):
    with open(path) as f:
        return config_from_dict(json.load(f))


def save_config(cfg, path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
