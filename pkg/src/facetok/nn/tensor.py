"""Minimal reverse-mode autodiff over numpy arrays.

Design: a Tensor wraps an ndarray; each op records its parents and a
closure that routes the upstream gradient. backward() topologically sorts
the graph from a scalar loss and accumulates into .grad (caller zeroes).
Training runs in float32; gradient checking builds float64 graphs.
"""

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, parents=(), backward=None):
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data, dtype=np.float32)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar loss")
        topo, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self._accum(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def zero_grad(self):
        self.grad = None

    # -- operator sugar ----------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, mul_const(other, -1.0) if isinstance(other, Tensor) else -np.asarray(other))

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)


def as_tensor(x, dtype=np.float32):
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def constant(x):
    """Tensor that never requires grad (stop-gradient wrapper)."""
    data = x.data if isinstance(x, Tensor) else x
    return Tensor(np.asarray(data))


def _unbroadcast(g, shape):
    """Sum gradient g down to the given (broadcast-source) shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data + b.data, parents=(a, b))

    def bw(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(g, b.data.shape))

    out._backward = bw
    return out


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data * b.data, parents=(a, b))

    def bw(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(g * a.data, b.data.shape))

    out._backward = bw
    return out


def mul_const(a, c):
    a = as_tensor(a)
    out = Tensor(a.data * c, parents=(a,))

    def bw(g):
        a._accum(g * c)

    out._backward = bw
    return out


def matmul(a, b):
    """Stacked matrix product; leading batch dims must already align."""
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data @ b.data, parents=(a, b))

    def bw(g):
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2)
            a._accum(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g
            b._accum(_unbroadcast(gb, b.data.shape))

    out._backward = bw
    return out


def relu(a):
    a = as_tensor(a)
    out = Tensor(np.maximum(a.data, 0), parents=(a,))

    def bw(g):
        a._accum(g * (a.data > 0))

    out._backward = bw
    return out


def gelu(a):
    """tanh-approximation GELU."""
    a = as_tensor(a)
    x = a.data
    c = 0.7978845608028654  # sqrt(2/pi)
    inner = c * (x + 0.044715 * x**3)
    t = np.tanh(inner)
    out = Tensor(0.5 * x * (1.0 + t), parents=(a,))

    def bw(g):
        dinner = c * (1.0 + 3 * 0.044715 * x**2)
        da = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner
        a._accum(g * da.astype(x.dtype))

    out._backward = bw
    return out


def tanh(a):
    a = as_tensor(a)
    t = np.tanh(a.data)
    out = Tensor(t, parents=(a,))

    def bw(g):
        a._accum(g * (1.0 - t * t))

    out._backward = bw
    return out


def softmax(a, axis=-1):
    a = as_tensor(a)
    m = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(m)
    s = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(s, parents=(a,))

    def bw(g):
        dot = (g * s).sum(axis=axis, keepdims=True)
        a._accum(s * (g - dot))

    out._backward = bw
    return out


def layer_norm(a, gamma, beta, eps=1e-5):
    """Normalize over the last axis, then scale and shift."""
    a, gamma, beta = as_tensor(a), as_tensor(gamma), as_tensor(beta)
    x = a.data
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = Tensor(xhat * gamma.data + beta.data, parents=(a, gamma, beta))

    def bw(g):
        n = x.shape[-1]
        if gamma.requires_grad:
            gamma._accum(_unbroadcast(g * xhat, gamma.data.shape))
        if beta.requires_grad:
            beta._accum(_unbroadcast(g, beta.data.shape))
        if a.requires_grad:
            gx = g * gamma.data
            a._accum(
                inv / n * (n * gx - gx.sum(axis=-1, keepdims=True) - xhat * (gx * xhat).sum(axis=-1, keepdims=True))
            )

    out._backward = bw
    return out


def embedding(table, ids):
    """Row lookup: table (V, C) indexed by an integer array of any shape."""
    table = as_tensor(table)
    ids = np.asarray(ids)
    out = Tensor(table.data[ids], parents=(table,))

    def bw(g):
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, ids.reshape(-1), g.reshape(-1, table.data.shape[1]))

    out._backward = bw
    return out


def reshape(a, shape):
    a = as_tensor(a)
    out = Tensor(a.data.reshape(shape), parents=(a,))

    def bw(g):
        a._accum(g.reshape(a.data.shape))

    out._backward = bw
    return out


def transpose(a, axes):
    a = as_tensor(a)
    out = Tensor(np.transpose(a.data, axes), parents=(a,))
    inv = np.argsort(axes)

    def bw(g):
        a._accum(np.transpose(g, inv))

    out._backward = bw
    return out


def getitem(a, idx):
    """Basic (non-overlapping) slicing only."""
    a = as_tensor(a)
    out = Tensor(a.data[idx], parents=(a,))

    def bw(g):
        if a.grad is None:
            a.grad = np.zeros_like(a.data)
        a.grad[idx] += g

    out._backward = bw
    return out


def concat(tensors, axis):
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), parents=tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                t._accum(g[tuple(sl)])

    out._backward = bw
    return out


def pad_time(a, before, after):
    """Zero-pad a (..., T, C) tensor along the T axis."""
    a = as_tensor(a)
    width = [(0, 0)] * a.data.ndim
    width[-2] = (before, after)
    out = Tensor(np.pad(a.data, width), parents=(a,))

    def bw(g):
        sl = [slice(None)] * g.ndim
        t = a.data.shape[-2]
        sl[-2] = slice(before, before + t)
        a._accum(g[tuple(sl)])

    out._backward = bw
    return out


def sum_all(a):
    a = as_tensor(a)
    out = Tensor(np.asarray(a.data.sum()), parents=(a,))

    def bw(g):
        a._accum(np.broadcast_to(g, a.data.shape).astype(a.data.dtype))

    out._backward = bw
    return out


def mean_all(a):
    a = as_tensor(a)
    n = a.data.size
    out = Tensor(np.asarray(a.data.sum() / n), parents=(a,))

    def bw(g):
        a._accum(np.broadcast_to(g / n, a.data.shape).astype(a.data.dtype))

    out._backward = bw
    return out


def mean_axis(a, axis):
    a = as_tensor(a)
    out = Tensor(a.data.mean(axis=axis), parents=(a,))
    n = a.data.shape[axis]

    def bw(g):
        a._accum(np.broadcast_to(np.expand_dims(g, axis) / n, a.data.shape).astype(a.data.dtype))

    out._backward = bw
    return out


def l1_loss(pred, target):
    """Mean absolute error; subgradient 0 at exact ties."""
    pred, target = as_tensor(pred), as_tensor(target)
    diff = pred.data - target.data
    out = Tensor(np.asarray(np.abs(diff).mean()), parents=(pred, target))

    def bw(g):
        s = np.sign(diff) * (g / diff.size)
        if pred.requires_grad:
            pred._accum(s.astype(pred.data.dtype))
        if target.requires_grad:
            target._accum(-s.astype(target.data.dtype))

    out._backward = bw
    return out


def mse_loss(pred, target):
    pred, target = as_tensor(pred), as_tensor(target)
    diff = pred.data - target.data
    out = Tensor(np.asarray((diff * diff).mean()), parents=(pred, target))

    def bw(g):
        s = 2.0 * diff * (g / diff.size)
        if pred.requires_grad:
            pred._accum(s.astype(pred.data.dtype))
        if target.requires_grad:
            target._accum(-s.astype(target.data.dtype))

    out._backward = bw
    return out


def cross_entropy(logits, target_ids, mask=None):
    """Masked mean token cross-entropy.

    logits: (N, V) Tensor; target_ids: (N,) ints; mask: (N,) floats or None
    (None = all positions). Mean is over mask weight.
    """
    logits = as_tensor(logits)
    target_ids = np.asarray(target_ids)
    n, v = logits.data.shape
    if mask is None:
        mask = np.ones(n, dtype=logits.data.dtype)
    else:
        mask = np.asarray(mask, dtype=logits.data.dtype)
    x = logits.data
    m = x.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(x - m).sum(axis=1))
    nll = lse - x[np.arange(n), target_ids]
    denom = mask.sum()
    if denom <= 0:
        raise ValueError("cross_entropy mask selects no positions")
    out = Tensor(np.asarray((nll * mask).sum() / denom), parents=(logits,))

    def bw(g):
        p = np.exp(x - m)
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(n), target_ids] -= 1.0
        logits._accum((p * (mask / denom)[:, None] * g).astype(x.dtype))

    out._backward = bw
    return out


def straight_through(z, quantized_values):
    """Forward: the quantized array. Backward: identity gradient into z."""
    z = as_tensor(z)
    out = Tensor(np.asarray(quantized_values, dtype=z.data.dtype), parents=(z,))

    def bw(g):
        z._accum(g)

    out._backward = bw
    return out


def l2_normalize(a, eps=1e-8):
    """Row-normalize over the last axis."""
    a = as_tensor(a)
    x = a.data
    n = np.sqrt((x * x).sum(axis=-1, keepdims=True) + eps)
    y = x / n
    out = Tensor(y, parents=(a,))

    def bw(g):
        dot = (g * y).sum(axis=-1, keepdims=True)
        a._accum((g - y * dot) / n)

    out._backward = bw
    return out


class Parameter(Tensor):
    """Trainable tensor with a stable dotted-path name."""

    __slots__ = ("name",)

    def __init__(self, data, name):
        super().__init__(np.asarray(data), requires_grad=True)
        self.name = name
