"""HTTP service exposing trained models to the explorer UI.

All request and response bodies use the animation/trajectory document
formats from the data module. Every generative endpoint takes an explicit
seed and derives its random stream from (seed, endpoint), so identical
requests always produce identical responses and results can be bookmarked
and replayed.

Frames travel over the wire in raw dataset units: requests are normalized
with the target model's stored parameters (plus fresh orientation removal
for canonicalized models) and generated frames are mapped back before they
are returned.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import data as dataio
from .data import (
    DataError,
    NormalizationParams,
    animation_doc,
    apply_global_normalization,
    canonicalize_frames,
    invert_global_normalization,
    load_animation,
    parse_animation_doc,
)
from .pose_ae import LatentTrajectory, PoseAutoencoder, decode_trajectory, project
from .rng import split_rng
from .seq_vae import SequenceVae
from .seqrnn import SeqRnnModel
from .store import load_model

log = logging.getLogger("choreo.service")

DEFAULT_BODY_LIMIT = 8 * 1024 * 1024


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class ServeConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    models: dict = field(default_factory=dict)    # name -> checkpoint path
    datasets: dict = field(default_factory=dict)  # name -> animation path
    static_dir: str | None = None
    max_body_bytes: int = DEFAULT_BODY_LIMIT

    @classmethod
    def from_json(cls, path) -> "ServeConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            host=doc.get("host", "127.0.0.1"),
            port=int(doc.get("port", 8080)),
            models=dict(doc.get("models", {})),
            datasets=dict(doc.get("datasets", {})),
            static_dir=doc.get("static_dir"),
            max_body_bytes=int(doc.get("max_body_bytes", DEFAULT_BODY_LIMIT)),
        )


@dataclass
class LoadedModel:
    name: str
    model: object
    manifest: dict

    @property
    def kind(self) -> str:
        return self.manifest.get("kind", "")

    @property
    def fps(self) -> float:
        return float(self.manifest.get("fps", dataio.DEFAULT_FPS))

    @property
    def norm(self) -> NormalizationParams | None:
        raw = self.manifest.get("normalization")
        return NormalizationParams.from_dict(raw) if raw else None

    def describe(self) -> dict:
        info = {"name": self.name, "kind": self.kind, "fps": self.fps}
        model = self.model
        if isinstance(model, PoseAutoencoder):
            info["latent_dim"] = model.latent_dim
        elif isinstance(model, SequenceVae):
            info["latent_dim"] = model.latent_dim
            info["seq_len"] = model.seq_len
        elif isinstance(model, SeqRnnModel):
            info["prompt_len"] = model.prompt_len
            info["predict_len"] = model.predict_len
        return info

    # -- raw <-> model space --------------------------------------------
    def prepare(self, frames: np.ndarray) -> np.ndarray:
        """Raw (T, 53, 3) request frames to normalized flat (T, 159)."""
        if self.manifest.get("orientation_removed"):
            pair = tuple(self.manifest.get("heading_pair", (1, 2)))
            frames, _, _ = canonicalize_frames(frames, pair)
        norm = self.norm
        if norm is not None:
            frames = apply_global_normalization(frames, norm)
        return frames.reshape(frames.shape[0], -1)

    def restore(self, flat: np.ndarray) -> np.ndarray:
        """Normalized flat (T, 159) model output back to raw (T, 53, 3)."""
        frames = flat.reshape(flat.shape[0], dataio.VERTEX_COUNT, 3)
        norm = self.norm
        if norm is not None:
            frames = invert_global_normalization(frames, norm)
        return frames


def _parse_frames(body_frames, fps: float | None = None) -> np.ndarray:
    doc = {"version": 1, "fps": fps or dataio.DEFAULT_FPS,
           "vertex_count": dataio.VERTEX_COUNT, "frames": body_frames}
    try:
        frames, _ = parse_animation_doc(doc)
    except DataError as exc:
        raise ApiError(422, str(exc)) from exc
    return frames


# ---------------------------------------------------------------------------
# request bodies

class DecodeTrajectoryBody(BaseModel):
    model: str
    points: list[list[float]]
    interpolation: str = "linear"
    samples_per_segment: int = Field(default=1, ge=1, le=1000)


class ProjectBody(BaseModel):
    model: str
    frames: list[list[list[float]]]


class SampleBody(BaseModel):
    model: str
    count: int = Field(ge=1, le=64)
    radius: float = Field(default=1.0, ge=0.0)
    seed: int = 0


class VaryBody(BaseModel):
    model: str
    frames: list[list[list[float]]]
    sigma: float = Field(ge=0.0)
    count: int = Field(default=1, ge=1, le=64)
    seed: int = 0


class GenerateBody(BaseModel):
    model: str
    prompt_frames: list[list[list[float]]]
    steps: int = Field(ge=0, le=4096)
    temperature: float = Field(default=1.0, ge=0.0)
    seed: int = 0


# ---------------------------------------------------------------------------

def build_app(config: ServeConfig) -> FastAPI:
    """Load every registered checkpoint and dataset, then assemble routes.

    Any checkpoint or dataset that fails to load aborts startup.
    """
    registry: dict[str, LoadedModel] = {}
    for name, path in config.models.items():
        model, manifest = load_model(path)
        registry[name] = LoadedModel(name=name, model=model, manifest=manifest)
        log.info("loaded model %r (%s) from %s", name, registry[name].kind, path)
    datasets = {name: load_animation(path) for name, path in config.datasets.items()}

    app = FastAPI(title="choreo", docs_url=None, redoc_url=None)

    def entry(name: str, *kinds) -> LoadedModel:
        if name not in registry:
            raise ApiError(404, f"unknown model {name!r}")
        loaded = registry[name]
        if kinds and loaded.kind not in kinds:
            raise ApiError(
                422, f"model {name!r} has kind {loaded.kind!r}, expected {kinds}"
            )
        return loaded

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        detail = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(Exception)
    async def internal_handler(request: Request, exc: Exception):
        log.exception("internal error on %s", request.url.path)
        return JSONResponse(status_code=500, content={"detail": "internal server error"})

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > config.max_body_bytes:
            return JSONResponse(status_code=413,
                                content={"detail": "request body too large"})
        return await call_next(request)

    # -- endpoints -------------------------------------------------------
    @app.get("/api/models")
    def list_models():
        return {"models": [loaded.describe() for loaded in registry.values()]}

    @app.post("/api/pose/decode-trajectory")
    def pose_decode_trajectory(body: DecodeTrajectoryBody):
        loaded = entry(body.model, "pose_ae")
        model: PoseAutoencoder = loaded.model
        points = np.asarray(body.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] != model.latent_dim:
            raise ApiError(422, f"points must be (N>=1, {model.latent_dim})")
        if body.interpolation not in ("linear", "catmull-rom"):
            raise ApiError(422, f"unknown interpolation {body.interpolation!r}")
        frames = decode_trajectory(model, LatentTrajectory(points),
                                   body.interpolation, body.samples_per_segment)
        return animation_doc(loaded.restore(frames), loaded.fps)

    @app.post("/api/pose/project")
    def pose_project(body: ProjectBody):
        loaded = entry(body.model, "pose_ae")
        frames = _parse_frames(body.frames)
        traj = project(loaded.model, loaded.prepare(frames), fps=loaded.fps)
        return traj.to_doc()

    @app.post("/api/vae/sample")
    def vae_sample(body: SampleBody):
        loaded = entry(body.model, "seq_vae")
        rng = split_rng(body.seed, "api.vae.sample")
        docs = []
        for _ in range(body.count):
            seq = loaded.model.sample_unconditional(rng, radius=body.radius)
            docs.append(animation_doc(loaded.restore(seq), loaded.fps))
        return {"animations": docs}

    @app.post("/api/vae/vary")
    def vae_vary(body: VaryBody):
        loaded = entry(body.model, "seq_vae")
        model: SequenceVae = loaded.model
        frames = _parse_frames(body.frames)
        if frames.shape[0] != model.seq_len:
            raise ApiError(422,
                           f"need exactly {model.seq_len} frames, got {frames.shape[0]}")
        base = loaded.prepare(frames)
        mean, _ = model.encode(base)
        recon = model.decode(mean)
        rng = split_rng(body.seed, "api.vae.vary")
        variations = model.vary(base, body.sigma, body.count, rng)
        return {
            "reconstruction": animation_doc(loaded.restore(recon), loaded.fps),
            "animations": [animation_doc(loaded.restore(v), loaded.fps)
                           for v in variations],
            "deviations": [float(np.abs(v - recon).mean()) for v in variations],
        }

    @app.post("/api/rnn/generate")
    def rnn_generate(body: GenerateBody):
        loaded = entry(body.model, "seq_rnn")
        model: SeqRnnModel = loaded.model
        frames = _parse_frames(body.prompt_frames)
        if frames.shape[0] < model.prompt_len:
            raise ApiError(422,
                           f"prompt needs {model.prompt_len} frames, got {frames.shape[0]}")
        prompt = loaded.prepare(frames)[-model.prompt_len:]
        rng = split_rng(body.seed, "api.rnn.generate")
        out = model.generate(prompt, body.steps, rng, body.temperature)
        return animation_doc(loaded.restore(out), loaded.fps)

    @app.get("/api/dataset/{name}/frames")
    def dataset_frames(name: str,
                       start: int = Query(default=0, alias="from", ge=0),
                       count: int = Query(default=128, ge=1, le=4096)):
        if name not in datasets:
            raise ApiError(404, f"unknown dataset {name!r}")
        ds = datasets[name]
        if start >= len(ds):
            raise ApiError(422, f"frame offset {start} beyond dataset of {len(ds)}")
        return animation_doc(ds.frames[start:start + count], ds.fps)

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True),
                  name="static")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index():
            return "<html><body><h1>choreo service</h1><p>No UI bundle configured.</p></body></html>"

    return app


def run(config: ServeConfig) -> None:
    import uvicorn

    app = build_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
