"""Geometry VQ-VAE: per-frame latents, EMA codebook, straight-through
quantization, mesh-space L1 supervision.

Encoder: per-frame MLP (E+3 -> hidden -> D) followed by a residual stage
of two temporal convolutions (kernel 5, same padding). Decoder mirrors it
back to E+3;
pose outputs pass through pi*tanh so angles stay inside (-pi, pi).
The mesh loss compares decoded and input frames meshed at zero pose; a
separate pose L1 keeps head-pose error observable on its own.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .face_model import MotionSequence
from .nn import Adam, Linear, Module, Parameter
from .nn import tensor as T


@dataclass
class VqvaeConfig:
    expr_dim: int = 16
    latent_dim: int = 64
    codebook_size: int = 512
    hidden: int = 128
    kernel_width: int = 5
    beta: float = 0.25  # commitment weight
    lambda_pose: float = 1.0
    ema_decay: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if self.kernel_width % 2 == 0:
            raise ValueError("kernel width must be odd")
        if self.beta <= 0:
            raise ValueError("commitment weight must be positive")
        if self.codebook_size < 2:
            raise ValueError("codebook needs at least 2 entries")


@dataclass
class GeometryTokenSequence:
    tokens: list
    source_length: int = 0

    def __post_init__(self):
        if not self.source_length:
            self.source_length = len(self.tokens)
        if len(self.tokens) != self.source_length:
            raise ValueError("exactly one token per source frame")


@dataclass
class VqLosses:
    mesh_l1: float
    pose_l1: float
    commitment: float
    total: float


class Codebook:
    """K x D quantizer entries with EMA usage statistics."""

    def __init__(self, size, dim, rng=None):
        rng = rng or np.random.default_rng(0)
        self.entries = (rng.standard_normal((size, dim)) * 0.05).astype(np.float32)
        self.ema_counts = np.zeros(size, dtype=np.float64)
        self.ema_sums = np.zeros((size, dim), dtype=np.float64)
        self.initialized = False

    @property
    def size(self):
        return self.entries.shape[0]

    def init_from_latents(self, latents, rng):
        idx = rng.integers(0, latents.shape[0], size=self.size)
        self.entries = latents[idx].astype(np.float32)
        self.ema_counts = np.ones(self.size, dtype=np.float64)
        self.ema_sums = self.entries.astype(np.float64).copy()
        self.initialized = True

    def ema_update(self, tokens, latents, decay, eps=1e-5):
        counts, sums = kernels.ema_accumulate(tokens, latents, self.size)
        self.ema_counts = decay * self.ema_counts + (1.0 - decay) * counts
        self.ema_sums = decay * self.ema_sums + (1.0 - decay) * sums
        self.entries = (
            self.ema_sums / np.maximum(self.ema_counts, eps)[:, None]
        ).astype(np.float32)

    def reseed_dead(self, latent_pool, rng, threshold_frac=0.01):
        """Reset entries whose EMA count fell below threshold_frac x mean."""
        threshold = threshold_frac * self.ema_counts.mean()
        dead = np.flatnonzero(self.ema_counts < threshold)
        for k in dead:
            z = latent_pool[rng.integers(0, latent_pool.shape[0])]
            self.entries[k] = z.astype(np.float32)
            self.ema_counts[k] = self.ema_counts.mean()
            self.ema_sums[k] = self.ema_counts[k] * z
        return len(dead)


def quantize(latents, codebook):
    """(tokens, quantized rows, commitment mse). Ties break to lowest index."""
    if codebook.size == 0:
        raise ValueError("empty codebook")
    z = np.asarray(latents, dtype=np.float32)
    if z.shape[-1] != codebook.entries.shape[1]:
        raise ValueError("latent dim does not match codebook dim")
    flat = z.reshape(-1, z.shape[-1])
    tokens = kernels.nearest_codes(flat, codebook.entries)
    quantized = codebook.entries[tokens].reshape(z.shape)
    commitment = float(np.mean((z - quantized) ** 2))
    return tokens.reshape(z.shape[:-1]), quantized, commitment


class TemporalConv(Module):
    """Same-padded 1D convolution over (B, T, C) via per-tap matmuls."""

    def __init__(self, rng, c_in, c_out, kernel_width, name):
        self.k = kernel_width
        std = np.sqrt(2.0 / (kernel_width * c_in))
        self.w = Parameter(
            (rng.standard_normal((kernel_width, c_in, c_out)) * std).astype(np.float32),
            f"{name}.weight",
        )
        self.b = Parameter(np.zeros(c_out, dtype=np.float32), f"{name}.bias")

    def __call__(self, x):
        t = x.data.shape[-2]
        half = self.k // 2
        xp = T.pad_time(x, half, half)
        acc = None
        for k in range(self.k):
            term = T.matmul(xp[:, k:k + t, :], self.w[k])
            acc = term if acc is None else T.add(acc, term)
        return T.add(acc, self.b)


class GeometryVqvae(Module):
    def __init__(self, config):
        self.config = config
        rng = np.random.default_rng(np.uint64(config.seed))
        c = config
        d_in = c.expr_dim + 3

        def he(n_in):
            return float(np.sqrt(2.0 / n_in))

        self.enc_fc1 = Linear(rng, d_in, c.hidden, "vqvae.encoder.fc1", std=he(d_in))
        self.enc_fc2 = Linear(rng, c.hidden, c.latent_dim, "vqvae.encoder.fc2", std=he(c.hidden))
        self.enc_conv1 = TemporalConv(rng, c.latent_dim, c.latent_dim, c.kernel_width, "vqvae.encoder.conv1")
        self.enc_conv2 = TemporalConv(rng, c.latent_dim, c.latent_dim, c.kernel_width, "vqvae.encoder.conv2")
        self.dec_conv1 = TemporalConv(rng, c.latent_dim, c.latent_dim, c.kernel_width, "vqvae.decoder.conv1")
        self.dec_conv2 = TemporalConv(rng, c.latent_dim, c.latent_dim, c.kernel_width, "vqvae.decoder.conv2")
        self.dec_fc1 = Linear(rng, c.latent_dim, c.hidden, "vqvae.decoder.fc1", std=he(c.latent_dim))
        self.dec_fc2 = Linear(rng, c.hidden, d_in, "vqvae.decoder.fc2", std=he(c.hidden))
        self.codebook = Codebook(c.codebook_size, c.latent_dim, rng)

    # -- forward pieces ----------------------------------------------------
    def encode_graph(self, x):
        """x: (B, T, E+3) Tensor -> (B, T, D) latents (autodiff graph)."""
        if x.data.shape[-2] < self.config.kernel_width:
            raise ValueError(
                f"sequence length {x.data.shape[-2]} shorter than kernel width"
            )
        h = T.relu(self.enc_fc1(x))
        z = self.enc_fc2(h)
        # Residual around the conv stage keeps the per-frame identity path
        # well-conditioned; without it training stalls at mean prediction.
        return T.add(z, self.enc_conv2(T.relu(self.enc_conv1(z))))

    def decode_graph(self, zq):
        """zq: (B, T, D) Tensor -> (expr (B,T,E), pose (B,T,3)) Tensors."""
        h = T.add(zq, self.dec_conv2(T.relu(self.dec_conv1(zq))))
        h = T.relu(self.dec_fc1(h))
        out = self.dec_fc2(h)
        expr = out[:, :, : self.config.expr_dim]
        pose = T.mul_const(T.tanh(out[:, :, self.config.expr_dim:]), np.pi)
        return expr, pose

    # -- frozen-model (numpy) API -----------------------------------------
    def encode(self, features):
        """features: (T, E+3) or (B, T, E+3) array -> latents, same leading dims."""
        arr = np.asarray(features, dtype=np.float32)
        squeeze = arr.ndim == 2
        if squeeze:
            arr = arr[None]
        z = self.encode_graph(T.Tensor(arr)).data
        return z[0] if squeeze else z

    def decode(self, quantized):
        """(T, D) or (B, T, D) quantized latents -> (expr, pose) arrays."""
        arr = np.asarray(quantized, dtype=np.float32)
        squeeze = arr.ndim == 2
        if squeeze:
            arr = arr[None]
        expr, pose = self.decode_graph(T.Tensor(arr))
        if squeeze:
            return expr.data[0], pose.data[0]
        return expr.data, pose.data

    def tokenize(self, seq):
        """MotionSequence -> GeometryTokenSequence (one token per frame)."""
        feats = sequence_features(seq)
        z = self.encode(feats)
        tokens, _, _ = quantize(z, self.codebook)
        return GeometryTokenSequence(tokens=[int(t) for t in tokens], source_length=len(seq))

    def detokenize(self, tokens):
        """Token ids -> MotionSequence decoded from codebook entries."""
        ids = np.asarray(tokens.tokens if isinstance(tokens, GeometryTokenSequence) else tokens)
        if ids.size == 0:
            raise ValueError("empty token sequence")
        if ids.min() < 0 or ids.max() >= self.codebook.size:
            raise ValueError(f"token out of [0, {self.codebook.size})")
        zq = self.codebook.entries[ids]
        expr, pose = self.decode(zq)
        return MotionSequence.from_arrays(expr, pose)


def sequence_features(seq):
    """(T, E+3) float32 features: expression coefficients then yaw/pitch/roll."""
    return np.concatenate([seq.expr_matrix(), seq.pose_matrix()], axis=1).astype(np.float32)


def train_step(model, face_model, batch, optimizer):
    """One optimization step on a (B, T, E+3) batch; returns VqLosses.

    Gradients flow through the straight-through path; the codebook is
    updated by EMA from the pre-quantization latents, after the losses are
    computed.
    """
    cfg = model.config
    x = T.Tensor(np.asarray(batch, dtype=np.float32))
    expr_gt = batch[:, :, : cfg.expr_dim].astype(np.float32)
    pose_gt = batch[:, :, cfg.expr_dim:].astype(np.float32)

    z = model.encode_graph(x)
    if not model.codebook.initialized:
        rng = np.random.default_rng(np.uint64(cfg.seed) + 1)
        model.codebook.init_from_latents(z.data.reshape(-1, cfg.latent_dim), rng)
    tokens, quantized, _ = quantize(z.data, model.codebook)
    zq = T.straight_through(z, quantized)
    commitment = T.mse_loss(z, T.Tensor(quantized))

    expr_hat, pose_hat = model.decode_graph(zq)
    basis = T.Tensor(face_model.basis_flat.astype(np.float32))
    mesh = T.l1_loss(T.matmul(expr_hat, basis), np.asarray(expr_gt @ face_model.basis_flat.astype(np.float32)))
    pose = T.l1_loss(pose_hat, pose_gt)
    total = T.add(mesh, T.add(T.mul_const(pose, cfg.lambda_pose), T.mul_const(commitment, cfg.beta)))

    losses = VqLosses(
        mesh_l1=float(mesh.data),
        pose_l1=float(pose.data),
        commitment=float(commitment.data),
        total=float(total.data),
    )
    if not np.isfinite(losses.total):
        raise FloatingPointError(f"non-finite VQ-VAE loss at step {optimizer.step_count}")

    optimizer.zero_grad()
    total.backward()
    optimizer.step()
    model.codebook.ema_update(
        tokens.reshape(-1), z.data.reshape(-1, cfg.latent_dim), cfg.ema_decay
    )
    return losses


def train_vqvae(model, face_model, sequences, steps, batch_size=32, lr=3e-4,
                crop_len=100, seed=0, reseed_every=200, log_every=50, log=None):
    """Train on random fixed-length crops of the given MotionSequences.

    Returns the per-step VqLosses trace.
    """
    rng = np.random.default_rng(np.uint64(seed))
    feats = [sequence_features(s) for s in sequences]
    optimizer = Adam(model.parameters(), lr=lr)
    trace = []
    for step in range(steps):
        idx = rng.integers(0, len(feats), size=batch_size)
        batch = np.stack([_random_crop(feats[i], crop_len, rng) for i in idx])
        losses = train_step(model, face_model, batch, optimizer)
        trace.append(losses)
        if reseed_every and (step + 1) % reseed_every == 0:
            pool = model.encode(batch).reshape(-1, model.config.latent_dim)
            model.codebook.reseed_dead(pool, rng)
        if log and (step % log_every == 0 or step == steps - 1):
            log(step, losses)
    return trace


def cycle_finetune(model, sequences, steps, batch_size=16, lr=3e-4,
                   decoder_lr=3e-5, crop_len=100, seed=0, log_every=50,
                   log=None):
    """Post-training pass that stabilizes token round-trips.

    Decoding a token sequence and re-encoding the reconstruction should land
    on the same codebook entries. With the codebook held fixed, this pass
    minimizes the latent gap between the re-encoded reconstruction and the
    originating codebook rows, so tokenize(detokenize(tokens)) == tokens for
    (nearly) every frame. Batches alternate between token sequences observed
    on real data and uniformly random token sequences, so the inverse
    property holds across the whole codebook, not just the data manifold.

    The encoder carries the adaptation; the decoder moves at a much smaller
    rate — just enough to pull apart codes whose decodings are confusable
    (which a frozen decoder cannot fix) without drifting reconstruction
    quality. Returns the per-step loss trace.
    """
    rng = np.random.default_rng(np.uint64(seed))
    feats = [sequence_features(s) for s in sequences]
    enc_opt = Adam([p for p in model.parameters() if ".encoder." in p.name], lr=lr)
    dec_opt = Adam([p for p in model.parameters() if ".decoder." in p.name], lr=decoder_lr)
    trace = []
    for step in range(steps):
        if step % 2 == 0:
            # token sequences that occur on real data
            idx = rng.integers(0, len(feats), size=batch_size)
            batch = np.stack([_random_crop(feats[i], crop_len, rng) for i in idx])
            z = model.encode(batch)
            _, quantized, _ = quantize(z, model.codebook)
        else:
            # uniformly random token sequences, covering the whole codebook
            tokens = rng.integers(0, model.codebook.size, size=(batch_size, crop_len))
            quantized = model.codebook.entries[tokens]
        expr, pose = model.decode_graph(T.Tensor(quantized.astype(np.float32)))
        z2 = model.encode_graph(T.concat([expr, pose], axis=2))
        loss = T.mse_loss(z2, T.Tensor(quantized))
        if not np.isfinite(float(loss.data)):
            raise FloatingPointError(f"non-finite cycle loss at step {step}")
        enc_opt.zero_grad()
        dec_opt.zero_grad()
        loss.backward()
        enc_opt.step()
        dec_opt.step()
        trace.append(float(loss.data))
        if log and (step % log_every == 0 or step == steps - 1):
            log(step, trace[-1])
    return trace


def roundtrip_consistency(model, sequences):
    """Fraction of frames whose token survives detokenize -> tokenize."""
    total = correct = 0
    for seq in sequences:
        toks = model.tokenize(seq)
        again = model.tokenize(model.detokenize(toks))
        a, b = np.asarray(toks.tokens), np.asarray(again.tokens)
        total += len(a)
        correct += int((a == b).sum())
    return correct / max(total, 1)


def token_roundtrip(model, n_sequences=100, min_len=40, max_len=150, seed=0):
    """Fraction of random valid tokens surviving detokenize -> tokenize."""
    rng = np.random.default_rng(np.uint64(seed))
    total = correct = 0
    for _ in range(n_sequences):
        length = int(rng.integers(min_len, max_len + 1))
        t = rng.integers(0, model.codebook.size, size=length)
        again = model.tokenize(model.detokenize(t))
        total += length
        correct += int((t == np.asarray(again.tokens)).sum())
    return correct / max(total, 1)


def _random_crop(feat, crop_len, rng):
    t = feat.shape[0]
    if t <= crop_len:
        reps = -(-crop_len // t)
        return np.tile(feat, (reps, 1))[:crop_len]
    start = rng.integers(0, t - crop_len + 1)
    return feat[start:start + crop_len]
