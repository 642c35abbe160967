"""Dual-encoder text-motion retrieval trained with symmetric InfoNCE.

Text side: mean-pooled word embeddings -> 2-layer MLP -> unit 64-d vector.
Motion side: mean-pooled geometry-token embeddings -> 2-layer MLP -> unit
64-d vector. Temperature 0.07.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ..nn import Adam, Linear, Module, Parameter
from ..nn import tensor as T


@dataclass
class RetrievalConfig:
    embed_dim: int = 64
    hidden: int = 128
    out_dim: int = 64
    temperature: float = 0.07
    seed: int = 0


class _Encoder(Module):
    def __init__(self, rng, n_items, cfg, name):
        self.table = Parameter(
            (rng.standard_normal((n_items, cfg.embed_dim)) * 0.02).astype(np.float32),
            f"{name}.table",
        )
        std1 = float(np.sqrt(2.0 / cfg.embed_dim))
        std2 = float(np.sqrt(2.0 / cfg.hidden))
        self.fc1 = Linear(rng, cfg.embed_dim, cfg.hidden, f"{name}.fc1", std=std1)
        self.fc2 = Linear(rng, cfg.hidden, cfg.out_dim, f"{name}.fc2", std=std2)

    def __call__(self, pooled):
        """pooled: (B, embed_dim) Tensor of mean-pooled item embeddings."""
        return T.l2_normalize(self.fc2(T.relu(self.fc1(pooled))))

    def pool(self, id_lists):
        """Mean-pool embedding rows for each id list (graph-building)."""
        rows = []
        for ids in id_lists:
            emb = T.embedding(self.table, np.asarray(ids, dtype=np.int64))
            rows.append(T.mean_axis(emb, 0))
        stacked = T.concat([T.reshape(r, (1, -1)) for r in rows], axis=0)
        return stacked


class RetrievalModel(Module):
    def __init__(self, n_words, n_codes, cfg=None):
        self.cfg = cfg or RetrievalConfig()
        rng = np.random.default_rng(np.uint64(self.cfg.seed))
        self.text_enc = _Encoder(rng, n_words, self.cfg, "retrieval.text")
        self.motion_enc = _Encoder(rng, n_codes, self.cfg, "retrieval.motion")

    def embed_text(self, word_id_lists):
        return self.text_enc(self.text_enc.pool(word_id_lists))

    def embed_motion(self, token_lists):
        return self.motion_enc(self.motion_enc.pool(token_lists))

    def embed_text_np(self, word_id_lists):
        return self.embed_text(word_id_lists).data

    def embed_motion_np(self, token_lists):
        return self.embed_motion(token_lists).data


def train_retrieval(pairs, n_words, n_codes, cfg=None, epochs=12, batch_size=64,
                    lr=1e-3, seed=0, log=None):
    """pairs: list of (text word-id list, motion token list, label).

    Symmetric InfoNCE over in-batch negatives; warns on degenerate batches
    where every pair shares one label.
    """
    cfg = cfg or RetrievalConfig()
    model = RetrievalModel(n_words, n_codes, cfg)
    rng = np.random.default_rng(np.uint64(seed))
    optimizer = Adam(model.parameters(), lr=lr)
    trace = []
    step = 0
    for _epoch in range(epochs):
        order = rng.permutation(len(pairs))
        for lo in range(0, len(pairs), batch_size):
            batch = [pairs[i] for i in order[lo:lo + batch_size]]
            if len(batch) < 4:
                continue
            if len({b[2] for b in batch}) == 1:
                warnings.warn("degenerate retrieval batch: all pairs share one label")
            te = model.embed_text([b[0] for b in batch])
            me = model.embed_motion([b[1] for b in batch])
            sims = T.mul_const(T.matmul(te, T.transpose(me, (1, 0))), 1.0 / cfg.temperature)
            targets = np.arange(len(batch))
            loss_t = T.cross_entropy(sims, targets)
            loss_m = T.cross_entropy(T.transpose(sims, (1, 0)), targets)
            loss = T.mul_const(T.add(loss_t, loss_m), 0.5)
            value = float(loss.data)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            trace.append(value)
            if log and step % 20 == 0:
                log(step, value)
            step += 1
    return model, trace


def retrieve(model, pairs):
    """R@1/5/10 and median rank, averaged over text->motion and motion->text."""
    texts = model.embed_text_np([p[0] for p in pairs])
    motions = model.embed_motion_np([p[1] for p in pairs])
    sims = texts @ motions.T
    n = len(pairs)
    ranks = []
    for i in range(n):
        ranks.append(1 + int((sims[i] > sims[i, i]).sum()))        # text -> motion
        ranks.append(1 + int((sims[:, i] > sims[i, i]).sum()))     # motion -> text
    ranks = np.array(ranks)
    return {
        "R@1": float((ranks <= 1).mean()),
        "R@5": float((ranks <= 5).mean()),
        "R@10": float((ranks <= 10).mean()),
        "median_rank": float(np.median(ranks)),
    }
