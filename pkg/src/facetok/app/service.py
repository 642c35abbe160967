"""HTTP/JSON API over a trained workspace.

Endpoints:
  GET  /api/health    - stage availability
  GET  /api/lexicon   - emotions, intensities, motion patterns, subjects
  POST /api/generate  - {prompt, temperature?, top_k?, seed?} -> tokens + frames
  POST /api/describe  - {tokens, question?, seed?} -> description
  POST /api/decode    - {tokens} -> frames + vertices

Frames are returned as JSON lists; per-frame mesh vertices are base64
float32 little-endian (T * V * 3 values) to keep payloads compact. The app
also serves the static web UI from frontend/dist when present.
"""

import base64
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from ..corpus import INTENSITIES, INTENSITY_AMPLITUDE, SUBJECTS, build_lexicon
from ..corpus.lexicon import INTENSITY_ADJECTIVES, INTENSITY_ADVERBS
from ..face_model import decode_mesh_batch
from ..motion_lm import MAX_MOTION_TOKENS
from ..text_codec import QUESTION_BANK
from .pipeline import StageError, Workspace, load_lm, load_vqvae, run_describe, run_generate
from ..vqvae import GeometryTokenSequence


class ModelBundle:
    """Lazily loaded models; `loading` gates requests during startup."""

    def __init__(self, ws):
        self.ws = ws
        self.loading = True
        self.vq_model = None
        self.l2m = None
        self.m2l = None
        self.cfg = None
        self.face_model = None
        self.lexicon = None

    def load(self):
        from .pipeline import face_model_for

        self.vq_model, self.cfg = load_vqvae(self.ws)
        self.face_model = face_model_for(self.cfg)
        self.lexicon = build_lexicon(self.cfg.face.expr_dim)
        if (self.ws.ckpt_dir("l2m") / "manifest.json").exists():
            self.l2m, _, _ = load_lm(self.ws, "l2m", self.cfg)
        if (self.ws.ckpt_dir("m2l") / "manifest.json").exists():
            self.m2l, _, _ = load_lm(self.ws, "m2l", self.cfg)
        self.loading = False


def _frames_payload(motion, face_model):
    expr = motion.expr_matrix()
    pose = motion.pose_matrix()
    verts = decode_mesh_batch(face_model, expr, pose)  # (T, V, 3)
    return {
        "n_frames": len(motion),
        "fps": 25,
        "duration_s": len(motion) / 25.0,
        "expr": [[round(float(v), 6) for v in row] for row in expr],
        "pose": [[round(float(v), 6) for v in row] for row in pose],
        "n_vertices": int(verts.shape[1]),
        "vertices_b64": base64.b64encode(
            np.ascontiguousarray(verts, dtype="<f4").tobytes()
        ).decode(),
    }


def _validate_tokens(body, k_geometry):
    tokens = body.get("tokens")
    if not isinstance(tokens, list) or not tokens:
        raise HTTPException(422, "tokens must be a non-empty list of integers")
    if not all(isinstance(t, int) and not isinstance(t, bool) for t in tokens):
        raise HTTPException(422, "tokens must be integers")
    if len(tokens) > MAX_MOTION_TOKENS:
        raise HTTPException(413, f"token sequence longer than {MAX_MOTION_TOKENS}")
    if any(t < 0 or t >= k_geometry for t in tokens):
        raise HTTPException(422, f"token ids must be in [0, {k_geometry})")
    return tokens


def create_app(ws_or_path, preload=True):
    ws = ws_or_path if isinstance(ws_or_path, Workspace) else Workspace(ws_or_path)
    app = FastAPI(title="facetok")
    bundle = ModelBundle(ws)
    app.state.bundle = bundle

    if preload:
        try:
            bundle.load()
        except StageError as exc:
            raise RuntimeError(str(exc)) from exc

    @app.exception_handler(Exception)
    async def on_error(request, exc):  # pragma: no cover - safety net
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    async def _json_body(request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "request body must be valid JSON")
        if not isinstance(body, dict):
            raise HTTPException(400, "request body must be a JSON object")
        return body

    def _ready():
        if bundle.loading:
            raise HTTPException(503, "models are still loading")

    @app.get("/api/health")
    def health():
        return {
            "status": "loading" if bundle.loading else "ok",
            "stages": {
                "vqvae": bundle.vq_model is not None,
                "l2m": bundle.l2m is not None,
                "m2l": bundle.m2l is not None,
            },
        }

    @app.get("/api/lexicon")
    def lexicon():
        _ready()
        lex = bundle.lexicon
        return {
            "emotions": [
                {"name": a.name, "base_word": a.base_word, "gerund": a.gerund_word}
                for a in lex.archetypes
            ],
            "intensities": [
                {
                    "name": name,
                    "adverb": INTENSITY_ADVERBS[name],
                    "adjective": INTENSITY_ADJECTIVES[name],
                    "amplitude": INTENSITY_AMPLITUDE[name],
                }
                for name in INTENSITIES
            ],
            "motions": [
                {"name": p.name, "axis": p.axis, "gerund_phrase": p.gerund_phrase}
                for p in lex.patterns
            ],
            "subjects": list(SUBJECTS),
            "questions": list(QUESTION_BANK),
            "k_geometry": bundle.vq_model.codebook.size,
        }

    @app.post("/api/generate")
    async def generate(request: Request):
        _ready()
        if bundle.l2m is None:
            raise HTTPException(409, "language-to-motion model not trained")
        body = await _json_body(request)
        prompt = body.get("prompt")
        if not isinstance(prompt, str) or not prompt.strip():
            raise HTTPException(422, "prompt must be a non-empty string")
        temperature = float(body.get("temperature", 0.0))
        top_k = int(body.get("top_k", 0))
        seed = int(body.get("seed", 0))
        if temperature < 0:
            raise HTTPException(422, "temperature must be >= 0")
        from ..motion_lm import GenerationParams, generate_motion

        try:
            token_seq, motion = generate_motion(
                bundle.l2m, bundle.vq_model, prompt,
                GenerationParams(temperature=temperature, top_k=top_k, seed=seed),
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        out = {"prompt": prompt, "tokens": token_seq.tokens, "seed": seed}
        out.update(_frames_payload(motion, bundle.face_model))
        return out

    @app.post("/api/describe")
    async def describe_endpoint(request: Request):
        _ready()
        if bundle.m2l is None:
            raise HTTPException(409, "motion-to-language model not trained")
        body = await _json_body(request)
        tokens = _validate_tokens(body, bundle.vq_model.codebook.size)
        question = body.get("question") or QUESTION_BANK[0]
        seed = int(body.get("seed", 0))
        from ..motion_lm import GenerationParams, describe

        text = describe(
            bundle.m2l, tokens, question,
            GenerationParams(temperature=0.0, max_new_tokens=40, seed=seed),
        )
        return {"tokens": tokens, "question": question, "description": text}

    @app.post("/api/decode")
    async def decode(request: Request):
        _ready()
        body = await _json_body(request)
        tokens = _validate_tokens(body, bundle.vq_model.codebook.size)
        motion = bundle.vq_model.detokenize(GeometryTokenSequence(tokens=tokens))
        out = {"tokens": tokens}
        out.update(_frames_payload(motion, bundle.face_model))
        return out

    dist = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if dist.is_dir():  # pragma: no cover - exercised when the UI is built
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=dist, html=True), name="webui")

    return app
