"""Command-line entry point.

Every subcommand operates on a workspace directory (--workspace) and prints
a one-line JSON summary on success so runs are scriptable.
"""

import argparse
import json
import sys

import numpy as np

from .config import RunConfig, load_config
from .pipeline import (
    StageError,
    Workspace,
    run_corpus,
    run_describe,
    run_eval,
    run_generate,
    run_train_l2m,
    run_train_m2l,
    run_train_vqvae,
    load_vqvae,
)


def _common(sub):
    sub.add_argument("--workspace", "-w", required=True, help="workspace directory")
    sub.add_argument("--config", help="run-config JSON (defaults to workspace copy)")
    sub.add_argument("--quiet", action="store_true", help="suppress progress lines")


def _load_cfg(args, ws):
    if args.config:
        return load_config(args.config)
    if ws.config_path.exists():
        return ws.load_run_config()
    return RunConfig()


def _progress(args, prefix):
    if args.quiet:
        return None

    def log(step, value):
        if isinstance(value, float):
            print(f"{prefix} step {step}: {value:.4f}", file=sys.stderr)
        else:
            print(f"{prefix} step {step}: {value}", file=sys.stderr)

    return log


def _emit(summary):
    print(json.dumps(summary, sort_keys=True))


def build_parser():
    p = argparse.ArgumentParser(
        prog="facetok",
        description="Tokenize facial motion into geometry tokens and align them with language.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("corpus-gen", help="generate the balanced prompt-motion corpus")
    _common(s)

    for name, help_text in [
        ("train-vqvae", "train the geometry tokenizer"),
        ("train-m2l", "train the motion-to-language model"),
        ("train-l2m", "train the language-to-motion model"),
    ]:
        s = sub.add_parser(name, help=help_text)
        _common(s)

    s = sub.add_parser("tokenize", help="tokenize a clip from the corpus")
    _common(s)
    s.add_argument("--clip-id", required=True)

    s = sub.add_parser("generate", help="generate motion tokens from a prompt")
    _common(s)
    s.add_argument("--prompt", required=True)
    s.add_argument("--temperature", type=float, default=0.0)
    s.add_argument("--top-k", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write decoded frames to this binary file")

    s = sub.add_parser("describe", help="describe a geometry-token sequence")
    _common(s)
    s.add_argument("--tokens", required=True, help="comma-separated token ids, or @file.json")
    s.add_argument("--question", default=None)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("eval", help="run the held-out evaluation suite")
    _common(s)
    s.add_argument("--n-roundtrip", type=int, default=200)

    s = sub.add_parser("export-embeddings", help="export per-clip embeddings to CSV")
    _common(s)
    s.add_argument("--split", default="test")
    s.add_argument("--out", required=True)

    s = sub.add_parser("serve", help="serve the HTTP API (and web UI if built)")
    _common(s)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)

    return p


def _parse_tokens(spec):
    if spec.startswith("@"):
        with open(spec[1:]) as f:
            data = json.load(f)
        return data["tokens"] if isinstance(data, dict) else data
    return [int(t) for t in spec.split(",") if t.strip()]


def main(argv=None):
    args = build_parser().parse_args(argv)
    ws = Workspace(args.workspace)
    try:
        cfg = _load_cfg(args, ws)
        if args.command == "corpus-gen":
            _emit(run_corpus(ws, cfg))
        elif args.command == "train-vqvae":
            _emit(run_train_vqvae(ws, cfg, log=_progress(args, "vqvae")))
        elif args.command == "train-m2l":
            _emit(run_train_m2l(ws, cfg, log=_progress(args, "m2l")))
        elif args.command == "train-l2m":
            _emit(run_train_l2m(ws, cfg, log=_progress(args, "l2m")))
        elif args.command == "tokenize":
            from ..corpus import load_corpus

            vq_model, cfg = load_vqvae(ws, cfg if args.config else None)
            for rec in load_corpus(ws.require_corpus()):
                if rec.prompt.clip_id == args.clip_id:
                    toks = vq_model.tokenize(rec.motion)
                    _emit({"clip_id": args.clip_id, "tokens": toks.tokens})
                    return 0
            print(f"error: clip {args.clip_id} not found", file=sys.stderr)
            return 1
        elif args.command == "generate":
            token_seq, motion, _ = run_generate(
                ws, args.prompt, temperature=args.temperature,
                top_k=args.top_k, seed=args.seed,
            )
            if args.out:
                from ..corpus import write_frames

                write_frames(args.out, motion)
            _emit({
                "prompt": args.prompt,
                "tokens": token_seq.tokens,
                "n_frames": len(motion),
                "duration_s": len(motion) / 25.0,
            })
        elif args.command == "describe":
            text, _ = run_describe(
                ws, _parse_tokens(args.tokens), question=args.question, seed=args.seed,
            )
            _emit({"description": text})
        elif args.command == "eval":
            log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
            _emit(run_eval(ws, cfg if args.config else None,
                           n_roundtrip=args.n_roundtrip, log=log))
        elif args.command == "export-embeddings":
            from ..corpus import load_corpus
            from ..evalsuite import clip_features, export_embeddings

            vq_model, cfg = load_vqvae(ws, cfg if args.config else None)
            recs = load_corpus(ws.require_corpus(), args.split)
            feats = clip_features(vq_model, [r.motion for r in recs])
            export_embeddings(
                args.out,
                [r.prompt.clip_id for r in recs],
                [r.prompt.labels.emotion for r in recs],
                np.asarray(feats),
            )
            _emit({"out": args.out, "n_clips": len(recs)})
        elif args.command == "serve":
            import uvicorn

            from .service import create_app

            uvicorn.run(create_app(ws), host=args.host, port=args.port)
        return 0
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
