"""Layers and the decoder-only transformer built on the autodiff core."""

import numpy as np

from . import tensor as T
from .tensor import Parameter


class Module:
    """Collects Parameters from attributes, recursively, in definition order."""

    def parameters(self):
        out = []
        for v in self.__dict__.values():
            if isinstance(v, Parameter):
                out.append(v)
            elif isinstance(v, Module):
                out.extend(v.parameters())
            elif isinstance(v, (list, tuple)):
                for item in v:
                    if isinstance(item, Module):
                        out.extend(item.parameters())
                    elif isinstance(item, Parameter):
                        out.append(item)
        return out

    def named_parameters(self):
        return {p.name: p for p in self.parameters()}

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()


class Linear(Module):
    def __init__(self, rng, n_in, n_out, name, std=0.02, dtype=np.float32):
        self.w = Parameter(rng.standard_normal((n_in, n_out)).astype(dtype) * std, f"{name}.weight")
        self.b = Parameter(np.zeros(n_out, dtype=dtype), f"{name}.bias")

    def __call__(self, x):
        return T.add(T.matmul(x, self.w), self.b)


class LayerNorm(Module):
    def __init__(self, dim, name, dtype=np.float32):
        self.g = Parameter(np.ones(dim, dtype=dtype), f"{name}.gamma")
        self.b = Parameter(np.zeros(dim, dtype=dtype), f"{name}.beta")

    def __call__(self, x):
        return T.layer_norm(x, self.g, self.b)


class CausalSelfAttention(Module):
    def __init__(self, rng, dim, heads, name, dtype=np.float32):
        if dim % heads != 0:
            raise ValueError("model_dim must be divisible by heads")
        self.dim, self.heads, self.head_dim = dim, heads, dim // heads
        self.qkv = Linear(rng, dim, 3 * dim, f"{name}.qkv", dtype=dtype)
        self.proj = Linear(rng, dim, dim, f"{name}.proj", dtype=dtype)

    def __call__(self, x):
        b, t, c = x.data.shape
        h, hd = self.heads, self.head_dim
        qkv = self.qkv(x)
        q = T.transpose(T.reshape(qkv[:, :, 0 * c:1 * c], (b, t, h, hd)), (0, 2, 1, 3))
        k = T.transpose(T.reshape(qkv[:, :, 1 * c:2 * c], (b, t, h, hd)), (0, 2, 1, 3))
        v = T.transpose(T.reshape(qkv[:, :, 2 * c:3 * c], (b, t, h, hd)), (0, 2, 1, 3))
        att = T.mul_const(T.matmul(q, T.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(hd))
        mask = np.where(np.tril(np.ones((t, t), dtype=bool)), 0.0, -1e9).astype(x.data.dtype)
        att = T.add(att, mask)
        att = T.softmax(att, axis=-1)
        y = T.matmul(att, v)
        y = T.reshape(T.transpose(y, (0, 2, 1, 3)), (b, t, c))
        return self.proj(y)


class TransformerBlock(Module):
    def __init__(self, rng, dim, heads, name, dtype=np.float32):
        self.ln1 = LayerNorm(dim, f"{name}.ln1", dtype=dtype)
        self.attn = CausalSelfAttention(rng, dim, heads, f"{name}.attn", dtype=dtype)
        self.ln2 = LayerNorm(dim, f"{name}.ln2", dtype=dtype)
        self.fc = Linear(rng, dim, 4 * dim, f"{name}.mlp.fc", dtype=dtype)
        self.out = Linear(rng, 4 * dim, dim, f"{name}.mlp.out", dtype=dtype)

    def __call__(self, x):
        x = T.add(x, self.attn(self.ln1(x)))
        x = T.add(x, self.out(T.gelu(self.fc(self.ln2(x)))))
        return x


class Transformer(Module):
    """GPT-style decoder: token + learned position embeddings, N blocks, final LN.

    The logits head is left to the caller (full-vocab vs restricted heads).
    """

    def __init__(self, rng, vocab_size, context_length, dim, heads, layers, name, dtype=np.float32):
        self.vocab_size = vocab_size
        self.context_length = context_length
        self.dim = dim
        self.tok_emb = Parameter(
            (rng.standard_normal((vocab_size, dim)) * 0.02).astype(dtype), f"{name}.tok_emb"
        )
        self.pos_emb = Parameter(
            (rng.standard_normal((context_length, dim)) * 0.02).astype(dtype), f"{name}.pos_emb"
        )
        self.blocks = [TransformerBlock(rng, dim, heads, f"{name}.block{i}", dtype=dtype) for i in range(layers)]
        self.ln_f = LayerNorm(dim, f"{name}.ln_f", dtype=dtype)

    def hidden(self, ids):
        """ids: (B, T) ints -> (B, T, dim) Tensor."""
        b, t = ids.shape
        if t > self.context_length:
            raise ValueError(f"sequence length {t} exceeds context {self.context_length}")
        x = T.add(T.embedding(self.tok_emb, ids), T.embedding(self.pos_emb, np.arange(t)))
        for blk in self.blocks:
            x = blk(x)
        return self.ln_f(x)
