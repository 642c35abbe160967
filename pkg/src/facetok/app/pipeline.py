"""Stage orchestration over a workspace directory.

Workspace layout:

  workspace/
    run_config.json          - the validated run configuration
    corpus/                  - generated clips + prompts + manifest
    checkpoints/vqvae/       - tokenizer checkpoint
    checkpoints/m2l/         - motion-to-language checkpoint (+ vocab.json)
    checkpoints/l2m/         - language-to-motion checkpoint (+ vocab.json)
    eval/                    - metric reports and embedding exports

Stages depend on earlier ones; a missing prerequisite raises StageError
naming the stage and the command that produces it.
"""

import json
from pathlib import Path

import numpy as np

from ..corpus import build_lexicon, generate_corpus, load_corpus, load_manifest
from ..face_model import make_synthetic_model
from ..motion_lm import (
    MAX_MOTION_TOKENS,
    GenerationParams,
    MotionLanguageModel,
    TransformerConfig,
    build_l2m_instance,
    build_m2l_instance,
    describe,
    generate_motion,
    teacher_forced_accuracy,
    train_l2m,
    train_m2l,
)
from ..text_codec import QUESTION_BANK, Vocabulary, build_vocab
from ..vqvae import (
    GeometryVqvae,
    VqvaeConfig,
    cycle_finetune,
    sequence_features,
    train_vqvae,
)
from . import checkpoint
from .config import RunConfig, load_config, save_config


class StageError(RuntimeError):
    """A pipeline stage was invoked before its prerequisites exist."""


class Workspace:
    def __init__(self, root):
        self.root = Path(root)

    @property
    def config_path(self):
        return self.root / "run_config.json"

    @property
    def corpus_dir(self):
        return self.root / "corpus"

    def ckpt_dir(self, stage):
        return self.root / "checkpoints" / stage

    @property
    def eval_dir(self):
        return self.root / "eval"

    def load_run_config(self):
        if not self.config_path.exists():
            return RunConfig()
        return load_config(self.config_path)

    def save_run_config(self, cfg):
        self.root.mkdir(parents=True, exist_ok=True)
        save_config(cfg, self.config_path)

    def require_corpus(self):
        if not (self.corpus_dir / "manifest.json").exists():
            raise StageError(
                "corpus not found: run `facetok corpus-gen` before this stage"
            )
        return self.corpus_dir

    def require_checkpoint(self, stage, producer):
        d = self.ckpt_dir(stage)
        if not (d / "manifest.json").exists():
            raise StageError(
                f"{stage} checkpoint not found: run `facetok {producer}` before this stage"
            )
        return d


def face_model_for(cfg):
    return make_synthetic_model(cfg.face.seed, cfg.face.n_vertices, cfg.face.expr_dim)


def run_corpus(ws, cfg):
    ws.save_run_config(cfg)
    manifest = generate_corpus(
        ws.corpus_dir,
        n_clips=cfg.corpus.n_clips,
        seed=cfg.corpus.seed,
        splits=cfg.corpus.splits,
        noise_sigma=cfg.corpus.noise_sigma,
        pose_noise_sigma=cfg.corpus.pose_noise_sigma,
        expr_dim=cfg.face.expr_dim,
    )
    return {
        "stage": "corpus",
        "n_clips": manifest["n_clips"],
        "out_dir": str(ws.corpus_dir),
        "lexicon_hash": manifest["lexicon_hash"],
    }


def _vqvae_config(cfg):
    return VqvaeConfig(
        expr_dim=cfg.face.expr_dim,
        latent_dim=cfg.vqvae.latent_dim,
        codebook_size=cfg.vqvae.codebook_size,
        hidden=cfg.vqvae.hidden,
        kernel_width=cfg.vqvae.kernel_width,
        beta=cfg.vqvae.beta,
        lambda_pose=cfg.vqvae.lambda_pose,
        ema_decay=cfg.vqvae.ema_decay,
        seed=cfg.vqvae.seed,
    )


def run_train_vqvae(ws, cfg, log=None):
    ws.require_corpus()
    records = load_corpus(ws.corpus_dir, "train")
    fm = face_model_for(cfg)
    model = GeometryVqvae(_vqvae_config(cfg))
    trace = train_vqvae(
        model, fm, [r.motion for r in records],
        steps=cfg.vqvae.steps, batch_size=cfg.vqvae.batch_size, lr=cfg.vqvae.lr,
        crop_len=cfg.vqvae.crop_len, seed=cfg.vqvae.seed,
        reseed_every=cfg.vqvae.reseed_every, log=log,
    )
    if cfg.vqvae.cycle_steps:
        cycle_finetune(
            model, [r.motion for r in records],
            steps=cfg.vqvae.cycle_steps, batch_size=cfg.vqvae.batch_size,
            lr=cfg.vqvae.cycle_lr, decoder_lr=cfg.vqvae.cycle_decoder_lr,
            crop_len=cfg.vqvae.crop_len,
            seed=cfg.vqvae.seed,
        )
    tensors = checkpoint.model_tensors(model)
    tensors["vqvae.codebook.entries"] = model.codebook.entries
    tensors["vqvae.codebook.ema_counts"] = model.codebook.ema_counts.astype(np.float32)
    tensors["vqvae.codebook.ema_sums"] = model.codebook.ema_sums.astype(np.float32)
    checkpoint.save_checkpoint(
        ws.ckpt_dir("vqvae"), tensors,
        {"stage": "vqvae", "run_config": cfg.to_dict()},
    )
    return {
        "stage": "train-vqvae",
        "steps": len(trace),
        "final_mesh_l1": trace[-1].mesh_l1,
        "final_pose_l1": trace[-1].pose_l1,
        "checkpoint": str(ws.ckpt_dir("vqvae")),
    }


def load_vqvae(ws, cfg=None):
    ckpt = ws.require_checkpoint("vqvae", "train-vqvae")
    tensors, meta = checkpoint.load_checkpoint(ckpt)
    if cfg is None:
        from .config import config_from_dict

        cfg = config_from_dict(meta["run_config"])
    model = GeometryVqvae(_vqvae_config(cfg))
    params = {k: v for k, v in tensors.items() if not k.startswith("vqvae.codebook.")}
    checkpoint.restore_model_tensors(model, params)
    model.codebook.entries = tensors["vqvae.codebook.entries"].copy()
    model.codebook.ema_counts = tensors["vqvae.codebook.ema_counts"].astype(np.float64)
    model.codebook.ema_sums = tensors["vqvae.codebook.ema_sums"].astype(np.float64)
    model.codebook.initialized = True
    return model, cfg


def _lm_config(cfg):
    return TransformerConfig(
        layers=cfg.lm.n_layers, heads=cfg.lm.n_heads, model_dim=cfg.lm.d_model,
        context_length=cfg.lm.context, seed=cfg.lm.seed,
    )


def build_workspace_vocab(ws, cfg):
    ws.require_corpus()
    return build_vocab(ws.corpus_dir, k_geometry=cfg.vqvae.codebook_size)


def tokenized_clips(ws, cfg, split, vq_model=None):
    """[(clip_id, geometry tokens, [texts], labels)] for the given split."""
    if vq_model is None:
        vq_model, _ = load_vqvae(ws, cfg)
    out = []
    for rec in load_corpus(ws.corpus_dir, split):
        toks = vq_model.tokenize(rec.motion)
        texts = [rec.prompt.text] + list(rec.prompt.paraphrases)
        out.append((rec.prompt.clip_id, toks.tokens, texts, rec.prompt.labels))
    return out


def run_train_m2l(ws, cfg, log=None):
    vq_model, _ = load_vqvae(ws, cfg)
    vocab = build_workspace_vocab(ws, cfg)
    clips = tokenized_clips(ws, cfg, "train", vq_model)
    model, trace = train_m2l(
        [(toks, texts) for _, toks, texts, _ in clips], vocab, _lm_config(cfg),
        epochs=cfg.lm.m2l_epochs, batch_size=cfg.lm.batch_size, lr=cfg.lm.lr,
        seed=cfg.lm.seed, log=log,
    )
    checkpoint.save_checkpoint(
        ws.ckpt_dir("m2l"), checkpoint.model_tensors(model),
        {"stage": "m2l", "head_size": model.head_size, "run_config": cfg.to_dict()},
        vocab=vocab,
    )
    return {
        "stage": "train-m2l",
        "steps": len(trace),
        "final_loss": trace[-1],
        "checkpoint": str(ws.ckpt_dir("m2l")),
    }


def run_train_l2m(ws, cfg, log=None):
    vq_model, _ = load_vqvae(ws, cfg)
    vocab = build_workspace_vocab(ws, cfg)
    clips = tokenized_clips(ws, cfg, "train", vq_model)
    model, trace = train_l2m(
        [(toks, texts) for _, toks, texts, _ in clips], vocab, _lm_config(cfg),
        epochs=cfg.lm.l2m_epochs, batch_size=cfg.lm.batch_size, lr=cfg.lm.lr,
        seed=cfg.lm.seed, log=log,
    )
    checkpoint.save_checkpoint(
        ws.ckpt_dir("l2m"), checkpoint.model_tensors(model),
        {"stage": "l2m", "head_size": model.head_size, "run_config": cfg.to_dict()},
        vocab=vocab,
    )
    return {
        "stage": "train-l2m",
        "steps": len(trace),
        "final_loss": trace[-1],
        "checkpoint": str(ws.ckpt_dir("l2m")),
    }


def load_lm(ws, stage, cfg=None):
    producer = {"m2l": "train-m2l", "l2m": "train-l2m"}[stage]
    ckpt = ws.require_checkpoint(stage, producer)
    tensors, meta = checkpoint.load_checkpoint(ckpt)
    if cfg is None:
        from .config import config_from_dict

        cfg = config_from_dict(meta["run_config"])
    vocab = Vocabulary.load(ckpt / "vocab.json")
    model = MotionLanguageModel(vocab, _lm_config(cfg), meta["head_size"], stage)
    checkpoint.restore_model_tensors(model, tensors)
    return model, vocab, cfg


def run_generate(ws, prompt, temperature=0.0, top_k=0, seed=0, cfg=None):
    model, vocab, cfg = load_lm(ws, "l2m", cfg)
    vq_model, _ = load_vqvae(ws, cfg)
    params = GenerationParams(
        temperature=temperature, top_k=top_k,
        max_new_tokens=MAX_MOTION_TOKENS, seed=seed,
    )
    token_seq, motion = generate_motion(model, vq_model, prompt, params)
    return token_seq, motion, cfg


def run_describe(ws, tokens, question=None, temperature=0.0, seed=0, cfg=None):
    model, vocab, cfg = load_lm(ws, "m2l", cfg)
    question = question or QUESTION_BANK[0]
    params = GenerationParams(temperature=temperature, max_new_tokens=40, seed=seed)
    return describe(model, tokens, question, params), cfg


def run_eval(ws, cfg=None, n_roundtrip=200, log=None):
    """Held-out evaluation across the trained stages; writes eval/report.json."""
    from ..evalsuite import (
        clip_features,
        frechet_distance,
        keyword_correctness,
        l2_metric,
        silhouette,
    )

    vq_model, cfg = load_vqvae(ws, cfg)
    fm = face_model_for(cfg)
    lexicon = build_lexicon(cfg.face.expr_dim)
    test = load_corpus(ws.corpus_dir, "test")
    report = {}

    # tokenizer quality on held-out clips
    per_mesh, used = [], set()
    stable, total = 0, 0
    for rec in test:
        toks = vq_model.tokenize(rec.motion)
        used.update(toks.tokens)
        recon = vq_model.detokenize(toks)
        feats = sequence_features(rec.motion)
        per_mesh.append(
            np.abs((recon.expr_matrix() - feats[:, : cfg.face.expr_dim]) @ fm.basis_flat).mean()
        )
        rt = vq_model.tokenize(recon)
        stable += sum(int(a == b) for a, b in zip(toks.tokens, rt.tokens))
        total += len(toks.tokens)
    report["vqvae"] = {
        "mesh_l1": float(np.mean(per_mesh)),
        "codebook_usage": len(used) / vq_model.codebook.size,
        "token_round_trip": stable / max(1, total),
    }

    # embedding structure
    feats = clip_features(vq_model, [r.motion for r in test])
    labels = [r.prompt.labels.emotion for r in test]
    if len(set(labels)) >= 2:
        report["silhouette_emotion"] = silhouette(feats, labels)

    m2l_done = (ws.ckpt_dir("m2l") / "manifest.json").exists()
    l2m_done = (ws.ckpt_dir("l2m") / "manifest.json").exists()

    if m2l_done:
        m2l, vocab, _ = load_lm(ws, "m2l", cfg)
        outs, gts = [], []
        for rec in test[: min(len(test), n_roundtrip)]:
            toks = vq_model.tokenize(rec.motion)
            outs.append(describe(m2l, toks, QUESTION_BANK[0]))
            gts.append(rec.prompt.labels)
            if log:
                log(f"described {len(outs)}/{min(len(test), n_roundtrip)}")
        report["m2l_keywords"] = keyword_correctness(outs, gts, lexicon.keyword_map)

    if l2m_done:
        l2m, vocab, _ = load_lm(ws, "l2m", cfg)
        insts = []
        for rec in test:
            toks = vq_model.tokenize(rec.motion)
            insts.append(build_l2m_instance(vocab, vocab.encode_text(rec.prompt.text), toks.tokens))
        report["l2m_teacher_forced_accuracy"] = teacher_forced_accuracy(l2m, insts)

        gen_feats, gt_feats = [], []
        exprs, gt_exprs = [], []
        for rec in test[: min(len(test), 64)]:
            _, motion, _ = _generate_with(l2m, vq_model, rec.prompt.text)
            e, p = l2_metric(motion, rec.motion)
            exprs.append(e)
            gt_exprs.append(p)
            gen_feats.append(vq_model.encode(sequence_features(motion)).mean(axis=0))
            gt_feats.append(vq_model.encode(sequence_features(rec.motion)).mean(axis=0))
        report["l2m_expr_l2"] = float(np.mean(exprs))
        report["l2m_pose_l2"] = float(np.mean(gt_exprs))
        report["l2m_frechet"] = frechet_distance(np.stack(gen_feats), np.stack(gt_feats))

    ws.eval_dir.mkdir(parents=True, exist_ok=True)
    with open(ws.eval_dir / "report.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
    report["stage"] = "eval"
    report["report_path"] = str(ws.eval_dir / "report.json")
    return report


def _generate_with(l2m, vq_model, prompt, seed=0):
    return generate_motion(l2m, vq_model, prompt, GenerationParams(seed=seed))
