"""Motion2Language and Language2Motion decoder-only transformers.

Both share the transformer substrate and the joint text+geometry
vocabulary. They differ in instance layout, loss masking, and output head:

  M2L: [BOS <mot> g1..gT </mot> <sep> question <sep> answer EOS]
       full-vocab head, loss on the answer span (answer + EOS);
       decoding is restricted to text ids + EOS.
  L2M: [BOS prompt <sep> <mot> g1..gT </mot>]
       restricted head over geometry ids + </mot> only, loss on the
       motion span.
"""

from dataclasses import dataclass

import numpy as np

from .nn import Adam, Linear, Module, Transformer
from .nn import tensor as T
from .text_codec import BOS, EOS, MOT_BEGIN, MOT_END, PAD, QUESTION_BANK, SEP
from .vqvae import GeometryTokenSequence

MAX_MOTION_TOKENS = 150


@dataclass
class TransformerConfig:
    layers: int = 4
    heads: int = 4
    model_dim: int = 128
    context_length: int = 320
    dropout: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.model_dim % self.heads != 0:
            raise ValueError("model_dim must be divisible by heads")


@dataclass
class GenerationParams:
    temperature: float = 0.0  # 0 = greedy
    top_k: int = 0  # 0 = off
    max_new_tokens: int = MAX_MOTION_TOKENS
    seed: int = 0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


class MotionLanguageModel(Module):
    """Transformer core plus a task head.

    head_size == vocab.size for M2L; K+1 (geometry ids + </mot>) for L2M.
    """

    def __init__(self, vocab, config, head_size, name):
        self.vocab = vocab
        self.config = config
        self.name = name
        rng = np.random.default_rng(np.uint64(config.seed))
        self.core = Transformer(
            rng, vocab.size, config.context_length, config.model_dim,
            config.heads, config.layers, name,
        )
        self.head = Linear(rng, config.model_dim, head_size, f"{name}.head")
        self.head_size = head_size

    def logits_graph(self, ids):
        """(B, T) int ids -> (B, T, head_size) logits Tensor."""
        return self.head(self.core.hidden(ids))

    def logits_np(self, ids):
        """Inference-only batched forward (no autodiff graph)."""
        h = _hidden_np(self.core, np.asarray(ids))
        return h @ self.head.w.data + self.head.b.data


# -- pure-numpy forward (shared by batched eval and the KV-cache decoder) --

def _ln_np(x, g, b, eps=1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    return xc / np.sqrt(var + eps) * g + b


def _gelu_np(x):
    c = 0.7978845608028654
    return 0.5 * x * (1.0 + np.tanh(c * (x + 0.044715 * x**3)))


def _softmax_np(x):
    m = x - x.max(axis=-1, keepdims=True)
    e = np.exp(m)
    return e / e.sum(axis=-1, keepdims=True)


def _hidden_np(core, ids):
    """Mirror of Transformer.hidden for frozen-model evaluation."""
    b, t = ids.shape
    x = core.tok_emb.data[ids] + core.pos_emb.data[:t]
    h_count = core.blocks[0].attn.heads
    hd = core.blocks[0].attn.head_dim
    mask = np.where(np.tril(np.ones((t, t), dtype=bool)), 0.0, -1e9).astype(np.float32)
    for blk in core.blocks:
        hn = _ln_np(x, blk.ln1.g.data, blk.ln1.b.data)
        qkv = hn @ blk.attn.qkv.w.data + blk.attn.qkv.b.data
        c = x.shape[-1]
        q, k, v = qkv[..., :c], qkv[..., c:2 * c], qkv[..., 2 * c:]
        q = q.reshape(b, t, h_count, hd).transpose(0, 2, 1, 3)
        k = k.reshape(b, t, h_count, hd).transpose(0, 2, 1, 3)
        v = v.reshape(b, t, h_count, hd).transpose(0, 2, 1, 3)
        att = _softmax_np(q @ k.transpose(0, 1, 3, 2) / np.sqrt(hd) + mask)
        y = (att @ v).transpose(0, 2, 1, 3).reshape(b, t, c)
        x = x + y @ blk.attn.proj.w.data + blk.attn.proj.b.data
        hn = _ln_np(x, blk.ln2.g.data, blk.ln2.b.data)
        hn = _gelu_np(hn @ blk.fc.w.data + blk.fc.b.data)
        x = x + hn @ blk.out.w.data + blk.out.b.data
    return _ln_np(x, core.ln_f.g.data, core.ln_f.b.data)


class CachedDecoder:
    """Incremental single-sequence decoding with per-layer KV caches.

    Produces logits identical to the full forward (verified in tests).
    """

    def __init__(self, model):
        self.model = model
        self.core = model.core
        self.pos = 0
        self.caches = [
            {"k": None, "v": None} for _ in self.core.blocks
        ]

    def feed(self, ids):
        """Append ids (1-D int array) and return the last position's logits."""
        core = self.core
        ids = np.asarray(ids)
        t = ids.shape[0]
        if self.pos + t > core.context_length:
            raise ValueError("context overflow in cached decode")
        x = core.tok_emb.data[ids] + core.pos_emb.data[self.pos:self.pos + t]
        h_count = core.blocks[0].attn.heads
        hd = core.blocks[0].attn.head_dim
        for blk, cache in zip(core.blocks, self.caches):
            hn = _ln_np(x, blk.ln1.g.data, blk.ln1.b.data)
            qkv = hn @ blk.attn.qkv.w.data + blk.attn.qkv.b.data
            c = x.shape[-1]
            q, k, v = qkv[..., :c], qkv[..., c:2 * c], qkv[..., 2 * c:]
            q = q.reshape(t, h_count, hd).transpose(1, 0, 2)
            k = k.reshape(t, h_count, hd).transpose(1, 0, 2)
            v = v.reshape(t, h_count, hd).transpose(1, 0, 2)
            if cache["k"] is None:
                cache["k"], cache["v"] = k, v
            else:
                cache["k"] = np.concatenate([cache["k"], k], axis=1)
                cache["v"] = np.concatenate([cache["v"], v], axis=1)
            total = cache["k"].shape[1]
            att = q @ cache["k"].transpose(0, 2, 1) / np.sqrt(hd)
            if t > 1:
                past = total - t
                rows = np.arange(t)[:, None]
                cols = np.arange(total)[None, :]
                att = att + np.where(cols <= past + rows, 0.0, -1e9).astype(np.float32)
            att = _softmax_np(att)
            y = (att @ cache["v"]).transpose(1, 0, 2).reshape(t, c)
            x = x + y @ blk.attn.proj.w.data + blk.attn.proj.b.data
            hn = _ln_np(x, blk.ln2.g.data, blk.ln2.b.data)
            hn = _gelu_np(hn @ blk.fc.w.data + blk.fc.b.data)
            x = x + hn @ blk.out.w.data + blk.out.b.data
        self.pos += t
        h = _ln_np(x[-1:], core.ln_f.g.data, core.ln_f.b.data)
        return (h @ self.model.head.w.data + self.model.head.b.data)[0]


def sample_from_logits(logits, params, rng, allowed=None):
    """Pick one id; temperature 0 is exact argmax. allowed: bool mask or None."""
    z = logits.astype(np.float64).copy()
    if allowed is not None:
        z[~allowed] = -np.inf
    if params.temperature == 0:
        return int(np.argmax(z))
    z /= params.temperature
    if params.top_k:
        kth = np.partition(z, -params.top_k)[-params.top_k]
        z[z < kth] = -np.inf
    z -= z.max()
    p = np.exp(z)
    p /= p.sum()
    return int(rng.choice(len(z), p=p))


# -- instance construction -------------------------------------------------

def build_m2l_instance(vocab, motion_tokens, question_ids, answer_ids):
    ids = (
        [BOS, MOT_BEGIN]
        + [vocab.geometry_id(g) for g in motion_tokens]
        + [MOT_END, SEP]
        + list(question_ids)
        + [SEP]
        + list(answer_ids)
        + [EOS]
    )
    # loss on predicting the answer span and the closing EOS
    answer_start = len(ids) - len(answer_ids) - 1
    mask = np.zeros(len(ids) - 1, dtype=np.float32)
    mask[answer_start - 1:] = 1.0
    return np.array(ids, dtype=np.int64), mask


def build_l2m_instance(vocab, prompt_ids, motion_tokens):
    ids = (
        [BOS]
        + list(prompt_ids)
        + [SEP, MOT_BEGIN]
        + [vocab.geometry_id(g) for g in motion_tokens]
        + [MOT_END]
    )
    motion_start = len(prompt_ids) + 2  # index of <mot>
    # local-head targets: 0..K-1 are geometry tokens, K is </mot>
    targets = np.full(len(ids) - 1, -1, dtype=np.int64)
    mask = np.zeros(len(ids) - 1, dtype=np.float32)
    for pos in range(motion_start, len(ids) - 1):
        nxt = ids[pos + 1]
        targets[pos] = vocab.k_geometry if nxt == MOT_END else vocab.geometry_token(nxt)
        mask[pos] = 1.0
    return np.array(ids, dtype=np.int64), targets, mask


# -- training --------------------------------------------------------------

def _pad_batch(seqs):
    width = max(len(s) for s in seqs)
    out = np.full((len(seqs), width), PAD, dtype=np.int64)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = s
    return out


def _train_loop(model, make_epoch_instances, epochs, batch_size, lr, seed, log=None):
    """Shared loop: instances are (ids, targets, mask) with flat targets.

    Returns the per-step loss trace. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(np.uint64(seed))
    optimizer = Adam(model.parameters(), lr=lr)
    trace = []
    skipped = 0
    step = 0
    for epoch in range(epochs):
        instances = make_epoch_instances(epoch, rng)
        kept = []
        for inst in instances:
            if len(inst[0]) > model.config.context_length:
                skipped += 1
                continue
            kept.append(inst)
        order = rng.permutation(len(kept))
        # group by similar length to limit padding
        order = sorted(order, key=lambda i: (len(kept[i][0]) // 16, i))
        for lo in range(0, len(kept), batch_size):
            chunk = [kept[i] for i in order[lo:lo + batch_size]]
            loss = _step(model, chunk, optimizer)
            trace.append(loss)
            if log and step % 20 == 0:
                log(step, loss)
            step += 1
    if skipped and log:
        log(-1, float(skipped))
    return trace


def _step(model, chunk, optimizer):
    ids = _pad_batch([c[0] for c in chunk])
    b, width = ids.shape
    targets = np.zeros((b, width - 1), dtype=np.int64)
    mask = np.zeros((b, width - 1), dtype=np.float32)
    for i, c in enumerate(chunk):
        n = len(c[0]) - 1
        targets[i, :n] = c[1][:n]
        mask[i, :n] = c[2]
    logits = model.logits_graph(ids[:, :-1])
    flat = T.reshape(logits, (b * (width - 1), model.head_size))
    safe_targets = np.where(targets < 0, 0, targets)
    loss = T.cross_entropy(flat, safe_targets.reshape(-1), mask.reshape(-1))
    value = float(loss.data)
    if not np.isfinite(value):
        raise FloatingPointError(f"non-finite LM loss at step {optimizer.step_count}")
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return value


def train_m2l(clip_tokens, vocab, config, epochs=10, batch_size=32, lr=3e-4,
              seed=0, log=None):
    """clip_tokens: list of (motion token list, [answer text candidates]).

    Questions pair uniformly from the question bank; the answer for each
    epoch is drawn uniformly from the clip's text + paraphrases.
    """
    model = MotionLanguageModel(vocab, config, vocab.size, "m2l")
    questions = [vocab.encode_text(q) for q in QUESTION_BANK]

    def make_instances(epoch, rng):
        out = []
        for tokens, answers in clip_tokens:
            q = questions[rng.integers(0, len(questions))]
            a = vocab.encode_text(answers[rng.integers(0, len(answers))])
            ids, mask = build_m2l_instance(vocab, tokens, q, a)
            out.append((ids, ids[1:], mask))
        return out

    trace = _train_loop(model, make_instances, epochs, batch_size, lr, seed, log)
    return model, trace


def train_l2m(clip_tokens, vocab, config, epochs=10, batch_size=32, lr=3e-4,
              seed=0, log=None):
    """clip_tokens: list of (motion token list, [prompt text candidates])."""
    model = MotionLanguageModel(vocab, config, vocab.k_geometry + 1, "l2m")

    def make_instances(epoch, rng):
        out = []
        for tokens, prompts in clip_tokens:
            p = vocab.encode_text(prompts[rng.integers(0, len(prompts))])
            ids, targets, mask = build_l2m_instance(vocab, p, tokens)
            out.append((ids, targets, mask))
        return out

    trace = _train_loop(model, make_instances, epochs, batch_size, lr, seed, log)
    return model, trace


# -- inference -------------------------------------------------------------

def describe(model, tokens, question, params=None):
    """Generate a text answer for a geometry-token sequence."""
    params = params or GenerationParams(max_new_tokens=40)
    vocab = model.vocab
    toks = tokens.tokens if isinstance(tokens, GeometryTokenSequence) else list(tokens)
    if len(toks) > MAX_MOTION_TOKENS:
        raise ValueError(f"motion longer than {MAX_MOTION_TOKENS} tokens")
    prefix = (
        [BOS, MOT_BEGIN]
        + [vocab.geometry_id(g) for g in toks]
        + [MOT_END, SEP]
        + vocab.encode_text(question)
        + [SEP]
    )
    allowed = np.zeros(vocab.size, dtype=bool)
    allowed[EOS] = True
    allowed[7:vocab.text_end] = True
    rng = np.random.default_rng(np.uint64(params.seed))
    dec = CachedDecoder(model)
    logits = dec.feed(np.array(prefix, dtype=np.int64))
    out = []
    for _ in range(params.max_new_tokens):
        nxt = sample_from_logits(logits, params, rng, allowed)
        if nxt == EOS:
            break
        out.append(nxt)
        logits = dec.feed(np.array([nxt], dtype=np.int64))
    return vocab.decode_text(out)


def generate_motion(model, vq_model, prompt, params=None):
    """Prompt -> geometry tokens (and the detokenized motion sequence)."""
    params = params or GenerationParams()
    vocab = model.vocab
    prompt_ids = vocab.encode_text(prompt)
    if not prompt_ids:
        raise ValueError("prompt is empty after normalization")
    prefix = [BOS] + prompt_ids + [SEP, MOT_BEGIN]
    limit = min(params.max_new_tokens, MAX_MOTION_TOKENS,
                model.config.context_length - len(prefix) - 1)
    if limit < 1:
        raise ValueError("prompt too long for the model context")
    rng = np.random.default_rng(np.uint64(params.seed))
    dec = CachedDecoder(model)
    logits = dec.feed(np.array(prefix, dtype=np.int64))
    tokens = []
    for _ in range(limit):
        local = sample_from_logits(logits, params, rng)
        if local == vocab.k_geometry:  # </mot>
            break
        tokens.append(local)
        logits = dec.feed(np.array([vocab.geometry_id(local)], dtype=np.int64))
    if not tokens:
        tokens = [0]
    seq = GeometryTokenSequence(tokens=tokens)
    return seq, vq_model.detokenize(seq)


def teacher_forced_accuracy(model, instances, batch_size=16):
    """Fraction of masked positions whose argmax logit hits the target."""
    hits, total = 0, 0
    for lo in range(0, len(instances), batch_size):
        chunk = instances[lo:lo + batch_size]
        ids = _pad_batch([c[0] for c in chunk])
        logits = model.logits_np(ids[:, :-1])
        pred = logits.argmax(axis=-1)
        for i, (seq, targets, mask) in enumerate(chunk):
            n = len(seq) - 1
            sel = mask[:n] > 0
            hits += int((pred[i, :n][sel] == targets[:n][sel]).sum())
            total += int(sel.sum())
    if total == 0:
        raise ValueError("no masked positions to score")
    return hits / total
