"""Quantitative metrics: expression/pose L2, Gaussian Frechet distance,
keyword-correctness, clip features, and silhouette-based cluster quality."""

import csv
import warnings

import numpy as np

from ..text_codec import extract_keywords
from ..vqvae import sequence_features


def l2_metric(pred, gt):
    """Mean per-frame Euclidean error, separately for expression and pose.

    Sequences of unequal length are compared up to the shorter one (with a
    warning), mirroring generated-vs-reference comparisons.
    """
    if len(pred) == 0 or len(gt) == 0:
        raise ValueError("empty sequence in l2_metric")
    n = min(len(pred), len(gt))
    if len(pred) != len(gt):
        warnings.warn(f"length mismatch {len(pred)} vs {len(gt)}; comparing first {n}")
    pe, ge = pred.expr_matrix()[:n], gt.expr_matrix()[:n]
    pp, gp = pred.pose_matrix()[:n], gt.pose_matrix()[:n]
    expr_l2 = float(np.linalg.norm(pe - ge, axis=1).mean())
    pose_l2 = float(np.linalg.norm(pp - gp, axis=1).mean())
    return expr_l2, pose_l2


def frechet_distance(feats_a, feats_b, eps=1e-6):
    """||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}).

    The matrix square root is taken via eigendecomposition of the
    symmetrized product Sa^{1/2} Sb Sa^{1/2}; eigenvalues below -1e-8 are
    an error, tiny negatives are clamped to zero.
    """
    a = np.asarray(feats_a, dtype=np.float64)
    b = np.asarray(feats_b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    d = a.shape[1]
    if b.shape[1] != d:
        raise ValueError("feature dimensions differ")
    mu_a, mu_b = a.mean(0), b.mean(0)
    cov_a = np.cov(a, rowvar=False).reshape(d, d)
    cov_b = np.cov(b, rowvar=False).reshape(d, d)
    if not (np.isfinite(cov_a).all() and np.isfinite(cov_b).all()):
        raise ValueError("non-finite covariance")
    if a.shape[0] < d + 1 or b.shape[0] < d + 1:
        warnings.warn("fewer samples than feature dim + 1; regularizing covariances")
        cov_a = cov_a + eps * np.eye(d)
        cov_b = cov_b + eps * np.eye(d)

    sqrt_a = _psd_sqrt(cov_a)
    inner = sqrt_a @ cov_b @ sqrt_a
    inner = (inner + inner.T) / 2.0
    vals = np.linalg.eigvalsh(inner)
    if vals.min() < -1e-8:
        raise ValueError(f"matrix square root failed: eigenvalue {vals.min()}")
    trace_sqrt = np.sqrt(np.clip(vals, 0.0, None)).sum()
    fd = float(np.sum((mu_a - mu_b) ** 2) + np.trace(cov_a) + np.trace(cov_b) - 2.0 * trace_sqrt)
    return max(fd, 0.0)


def _psd_sqrt(m):
    vals, vecs = np.linalg.eigh((m + m.T) / 2.0)
    if vals.min() < -1e-8:
        raise ValueError(f"covariance not PSD: eigenvalue {vals.min()}")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def clip_features(vq_model, sequences):
    """Per-clip features: mean-pooled pre-quantization encoder latents."""
    out = []
    for seq in sequences:
        z = vq_model.encode(sequence_features(seq))
        out.append(z.mean(axis=0))
    return np.stack(out)


def keyword_correctness(outputs, gt_labels, keyword_map):
    """Per-field accuracy of keyword extraction against ground-truth labels.

    outputs: list of generated description strings; gt_labels: matching
    ClipLabels. A missing extraction counts as wrong.
    """
    fields = ("emotion", "intensity", "motion")
    hits = {f: 0 for f in fields}
    for text, labels in zip(outputs, gt_labels):
        found = extract_keywords(keyword_map, text)
        for f in fields:
            if found.get(f) == getattr(labels, f):
                hits[f] += 1
    n = max(1, len(outputs))
    return {f: hits[f] / n for f in fields}


def silhouette(embeddings, labels):
    """Euclidean silhouette score in [-1, 1]; requires >= 2 distinct labels."""
    from sklearn.metrics import silhouette_score

    labels = np.asarray(labels)
    if len(set(labels.tolist())) < 2:
        raise ValueError("silhouette needs at least 2 distinct labels")
    return float(silhouette_score(np.asarray(embeddings), labels, metric="euclidean"))


def export_embeddings(path, clip_ids, labels, embeddings):
    """CSV with columns clip_id, label, e1..eD (for external projection)."""
    embeddings = np.asarray(embeddings)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["clip_id", "label"] + [f"e{i + 1}" for i in range(embeddings.shape[1])])
        for cid, lab, vec in zip(clip_ids, labels, embeddings):
            writer.writerow([cid, lab] + [f"{x:.6g}" for x in vec])
