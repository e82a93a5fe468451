"""HTTP JSON API over a loaded index, decoder and grammar.

All shared state is read-only after startup; traversal POI graphs are built
lazily per (n, weights) and cached under a lock. Every endpoint is
deterministic given the request body, and all floats in responses carry at
most nine significant digits. Errors use ``{"error": ..., "detail": ...}``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import dataset as dataset_io
from . import traversal as tv
from .grammar import Grammar, load_default_grammar, load_grammar
from .latent import (
    DEFAULT_ENCODER_SEED,
    DEFAULT_LATENT_DIM,
    GrammarLogitDecoder,
    ProjectionEncoder,
)
from .molecule import activity_class
from .traversal import (
    DisconnectedError,
    Endpoint,
    HeuristicWeights,
    LatentIndex,
    RequestError,
    TraversalRequest,
    round_floats,
)


@dataclass
class ApiSession:
    """Immutable bundle of loaded artifacts served by the app."""

    grammar: Grammar
    index: LatentIndex
    decoder: GrammarLogitDecoder
    encoder: ProjectionEncoder
    ready: bool = True
    _graphs: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _projection: list | None = field(default=None, repr=False)

    def graph_for(self, n: int, weights: HeuristicWeights) -> tv.PoiGraph:
        key = (n, weights.key())
        with self._lock:
            graph = self._graphs.get(key)
        if graph is not None:
            return graph
        graph = tv.build_poi_graph(self.index, self.decoder, n, weights)
        with self._lock:
            return self._graphs.setdefault(key, graph)


def pca_projection(points: np.ndarray) -> np.ndarray:
    """Top-2 principal components with a deterministic sign convention.

    Covariance eigendecomposition; each component's largest-magnitude loading
    (lowest index on ties) is made positive so restarts render identically.
    """
    pts = np.asarray(points, dtype=np.float64)
    centered = pts - pts.mean(axis=0, keepdims=True)
    if pts.shape[0] < 2:
        return np.zeros((pts.shape[0], 2))
    cov = centered.T @ centered / (pts.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    comps = eigvecs[:, ::-1][:, :2]  # descending eigenvalue order
    for j in range(comps.shape[1]):
        lead = int(np.argmax(np.abs(comps[:, j])))
        if comps[lead, j] < 0:
            comps[:, j] = -comps[:, j]
    return centered @ comps


def build_session(
    index_path: str | None = None,
    grammar_path: str | None = None,
    weights_path: str | None = None,
    encoder_seed: int = DEFAULT_ENCODER_SEED,
    latent_dim: int = DEFAULT_LATENT_DIM,
) -> ApiSession:
    """Assemble a session from files; defaults to the bundled grammar/corpus
    and the seeded stand-in decoder."""
    if grammar_path:
        grammar = load_grammar(Path(grammar_path).read_text("utf-8"))
    else:
        grammar = load_default_grammar()
    encoder = ProjectionEncoder(grammar, latent_dim=latent_dim, seed=encoder_seed)
    if index_path:
        index = dataset_io.load_index(index_path, grammar)
        if index.dim != latent_dim:
            encoder = ProjectionEncoder(grammar, latent_dim=index.dim, seed=encoder_seed)
    else:
        from importlib import resources

        with resources.as_file(
            resources.files("moltraverse.data").joinpath("corpus.csv")
        ) as corpus_path:
            loaded = dataset_io.load_dataset(corpus_path, grammar)
        index = tv.build_index(loaded.records, encoder)
    if weights_path:
        decoder = dataset_io.load_decoder_weights(weights_path, grammar)
    else:
        decoder = GrammarLogitDecoder(grammar, latent_dim=index.dim)
    return ApiSession(grammar, index, decoder, encoder)


class EndpointBody(BaseModel):
    coords: list[float] | None = None
    label: str | None = None
    id: str | None = None


class WeightsBody(BaseModel):
    fingerprint: float = 1.0
    sa: float = 0.0
    drug_likeness: float = 0.0
    activity: float = 0.0


class TraverseBody(BaseModel):
    source: EndpointBody
    destination: EndpointBody
    m: int = 100
    n: int = 8
    K: int = 4
    weights: WeightsBody = WeightsBody()
    mode: str = "perturb"
    sigma: float = 0.1
    seed: int = 0


class EncodeBody(BaseModel):
    smiles: str


def _error(status: int, error: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": error, "detail": detail})


def create_app(session: ApiSession, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="moltraverse", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "validation", str(exc.errors()))

    @app.get("/api/health")
    def health():
        if not session.ready:
            return _error(503, "loading", "index not loaded yet")
        return JSONResponse(content={"status": "ok"})

    @app.post("/api/encode")
    def encode(body: EncodeBody):
        try:
            coords = session.encoder.encode(body.smiles)
        except Exception as exc:
            return _error(400, "invalid smiles", str(exc))
        return JSONResponse(content=round_floats({"coords": [float(x) for x in coords]}))

    @app.get("/api/labels")
    def labels():
        counts = session.index.labels()
        return JSONResponse(
            content={"labels": [{"label": k, "count": v} for k, v in counts.items()]}
        )

    @app.get("/api/compound/{rec_id}")
    def compound(rec_id: str):
        try:
            _, rec = session.index.record_by_id(rec_id)
        except RequestError as exc:
            return _error(404, "unknown id", str(exc))
        profile = rec.profile
        act = activity_class(rec.activity).label if rec.activity is not None else None
        payload = {
            "id": rec.id,
            "smiles": rec.smiles,
            "label": rec.label,
            "activity": rec.activity,
            "properties": {
                "mw": profile.mw,
                "sa": profile.sa,
                "drug_likeness": profile.drug_likeness,
                "activity_class": act,
            },
        }
        return JSONResponse(content=round_floats(payload))

    @app.get("/api/projection")
    def projection():
        if session._projection is None:
            proj = pca_projection(session.index.points)
            session._projection = [
                {
                    "id": rec.id,
                    "x": float(proj[i, 0]),
                    "y": float(proj[i, 1]),
                    "label": rec.label,
                }
                for i, rec in enumerate(session.index.records)
            ]
        return JSONResponse(content=round_floats({"points": session._projection}))

    @app.post("/api/traverse")
    def traverse_endpoint(body: TraverseBody):
        request = TraversalRequest(
            source=Endpoint(
                coords=tuple(body.source.coords) if body.source.coords is not None else None,
                label=body.source.label,
                id=body.source.id,
            ),
            destination=Endpoint(
                coords=tuple(body.destination.coords)
                if body.destination.coords is not None
                else None,
                label=body.destination.label,
                id=body.destination.id,
            ),
            m=body.m,
            n=body.n,
            k_paths=body.K,
            weights=HeuristicWeights(
                body.weights.fingerprint,
                body.weights.sa,
                body.weights.drug_likeness,
                body.weights.activity,
            ),
            mode=body.mode,
            sigma=body.sigma,
            seed=body.seed,
        )
        try:
            request.validate()
            graph = session.graph_for(request.n, request.weights)
            result = tv.traverse(request, session.index, session.decoder, graph)
        except DisconnectedError as exc:
            return _error(409, "disconnected endpoints", str(exc))
        except RequestError as exc:
            return _error(400, "bad request", str(exc))
        except Exception as exc:
            return _error(500, "decoder failure", str(exc))
        return JSONResponse(content=round_floats(tv.result_to_dict(result)))

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
