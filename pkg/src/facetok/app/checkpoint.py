"""Checkpoint directory format.

  config.json  - run-config snapshot + lexicon hash + extra metadata
  vocab.json   - word list + geometry range size (when text models exist)
  tensors.bin  - records: name_len u32, name bytes, dtype u8 (0=f32),
                 rank u32, dims u32 x rank, little-endian f32 payload
  manifest.json- version + per-tensor sha256 checksums (verified on load)
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

CHECKPOINT_VERSION = 1


def _tensor_record(name, arr):
    arr = np.ascontiguousarray(arr, dtype="<f4")
    name_b = name.encode()
    head = struct.pack("<I", len(name_b)) + name_b + struct.pack("<BI", 0, arr.ndim)
    head += struct.pack(f"<{arr.ndim}I", *arr.shape)
    return head + arr.tobytes()


def save_tensors(path, tensors):
    """tensors: dict name -> ndarray. Returns per-tensor sha256 map."""
    checksums = {}
    with open(path, "wb") as f:
        for name in sorted(tensors):
            rec = _tensor_record(name, tensors[name])
            f.write(rec)
            checksums[name] = hashlib.sha256(
                np.ascontiguousarray(tensors[name], dtype="<f4").tobytes()
            ).hexdigest()
    return checksums


def load_tensors(path):
    raw = Path(path).read_bytes()
    out = {}
    off = 0
    while off < len(raw):
        (name_len,) = struct.unpack_from("<I", raw, off)
        off += 4
        name = raw[off:off + name_len].decode()
        off += name_len
        dtype, rank = struct.unpack_from("<BI", raw, off)
        off += 5
        if dtype != 0:
            raise ValueError(f"unknown dtype {dtype} for tensor {name}")
        dims = struct.unpack_from(f"<{rank}I", raw, off)
        off += 4 * rank
        n = int(np.prod(dims)) if rank else 1
        arr = np.frombuffer(raw, dtype="<f4", count=n, offset=off).reshape(dims)
        off += 4 * n
        out[name] = arr.astype(np.float32)
    return out


def save_checkpoint(ckpt_dir, tensors, config, vocab=None):
    ckpt_dir = Path(ckpt_dir)
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    checksums = save_tensors(ckpt_dir / "tensors.bin", tensors)
    with open(ckpt_dir / "config.json", "w") as f:
        json.dump(config, f, indent=2, sort_keys=True)
    if vocab is not None:
        vocab.save(ckpt_dir / "vocab.json")
    with open(ckpt_dir / "manifest.json", "w") as f:
        json.dump({"version": CHECKPOINT_VERSION, "tensors": checksums}, f, indent=2, sort_keys=True)


def load_checkpoint(ckpt_dir):
    """Returns (tensors, config). Fails loudly on checksum mismatch."""
    ckpt_dir = Path(ckpt_dir)
    with open(ckpt_dir / "manifest.json") as f:
        manifest = json.load(f)
    if manifest["version"] != CHECKPOINT_VERSION:
        raise ValueError(f"unknown checkpoint version {manifest['version']}")
    tensors = load_tensors(ckpt_dir / "tensors.bin")
    for name, digest in manifest["tensors"].items():
        if name not in tensors:
            raise ValueError(f"tensor {name} missing from checkpoint")
        actual = hashlib.sha256(
            np.ascontiguousarray(tensors[name], dtype="<f4").tobytes()
        ).hexdigest()
        if actual != digest:
            raise ValueError(f"checksum mismatch for tensor {name}")
    with open(ckpt_dir / "config.json") as f:
        config = json.load(f)
    return tensors, config


def model_tensors(module):
    """Parameter arrays of a Module keyed by parameter name."""
    return {p.name: p.data for p in module.parameters()}


def restore_model_tensors(module, tensors):
    for p in module.parameters():
        if p.name not in tensors:
            raise ValueError(f"checkpoint missing parameter {p.name}")
        arr = tensors[p.name]
        if tuple(arr.shape) != tuple(p.data.shape):
            raise ValueError(f"shape mismatch for {p.name}: {arr.shape} vs {p.data.shape}")
        p.data = arr.astype(p.data.dtype).copy()
