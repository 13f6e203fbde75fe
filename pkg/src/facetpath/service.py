"""HTTP service that augments type-ahead candidates with facet paths.

The upstream suggestion engine stays a black box: callers send its
candidate queries plus the shopper's session, and get each candidate
back with a truncated facet path and per-node confidence. Several
models can be loaded side by side and picked per request, so a rollout
can shift traffic incrementally. A bounded LRU cache keyed on
(normalized query, session signature, ct, model) absorbs the query
frequency power law; the session signature is order-insensitive because
mean pooling is permutation-invariant.
"""

from __future__ import annotations

import hashlib
import threading
import time
from collections import OrderedDict, deque
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .decision import DEFAULT_CT, DecisionConfig, truncate_prediction
from .embeddings import EmbeddingTable, session_vector
from .evalharness import SearchEventGroup, simulate_event
from .predictors import PathPrediction, normalize_query
from .taxonomy import Path, TaxonomyTree

__all__ = ["LruCache", "ServiceArtifacts", "create_app", "session_signature"]

MAX_CANDIDATES = 10
LATENCY_WINDOW = 10_000


class LruCache:
    """Bounded least-recently-used map, safe under concurrent access."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise ValueError("cache capacity must be positive")
        self.capacity = capacity
        self._store: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key not in self._store:
                return None
            self._store.move_to_end(key)
            return self._store[key]

    def put(self, key, value) -> None:
        with self._lock:
            if key in self._store:
                self._store.move_to_end(key)
            self._store[key] = value
            while len(self._store) > self.capacity:
                self._store.popitem(last=False)

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)


def session_signature(session_products: list[str] | tuple[str, ...]) -> str:
    """Order-insensitive digest of the session's product multiset."""
    joined = "\n".join(sorted(session_products))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


@dataclass
class ServiceArtifacts:
    """Everything a running service reads; immutable once loaded."""

    tree: TaxonomyTree
    predictors: dict[str, object]  # model id -> .predict(query, session_products, session_vec=None)
    default_model: str
    session_table: EmbeddingTable
    ct: float = DEFAULT_CT
    max_candidates: int = MAX_CANDIDATES
    cache_capacity: int = 10_000
    # Offline sweep rows and a sample of per-event traces, served to the UI.
    sweep_rows: list[dict] = field(default_factory=list)
    trace_sample: list[dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.default_model not in self.predictors:
            raise ValueError(f"default model {self.default_model!r} is not loaded")


class _Metrics:
    def __init__(self):
        self.lock = threading.Lock()
        self.requests_total = 0
        self.augment_requests_total = 0
        self.candidates_total = 0
        self.cache_hits_total = 0
        self.cache_misses_total = 0
        self.errors_total = 0
        self.latencies_us: deque = deque(maxlen=LATENCY_WINDOW)
        self.started = time.time()

    def snapshot(self) -> dict:
        with self.lock:
            lat = sorted(self.latencies_us)
            hits, misses = self.cache_hits_total, self.cache_misses_total
            out = {
                "requests_total": self.requests_total,
                "augment_requests_total": self.augment_requests_total,
                "candidates_total": self.candidates_total,
                "cache_hits_total": hits,
                "cache_misses_total": misses,
                "cache_hit_rate": hits / (hits + misses) if hits + misses else 0.0,
                "errors_total": self.errors_total,
                "uptime_seconds": time.time() - self.started,
            }
        for name, q in (("p50", 0.50), ("p90", 0.90), ("p99", 0.99)):
            out[f"latency_us_{name}"] = lat[min(int(q * len(lat)), len(lat) - 1)] if lat else 0
        return out


class AugmentRequest(BaseModel):
    session_products: list[str] = []
    candidates: list[str]
    ct_override: float | None = None
    model_id: str | None = None


class SimulateRequest(BaseModel):
    result_set: list[str]
    clicked: list[str]
    predicted_path: list[str]


def _prediction_payload(pred, ct: float, tree: TaxonomyTree) -> tuple[list[str], list[float]]:
    """Truncated labels plus the confidence that kept each node.

    A distribution-free prediction (the count model's) carries confidence
    1.0 per node: its paths qualify by click share, not by Gini, and the
    inclusive rule keeps them at any threshold.
    """
    if isinstance(pred, PathPrediction):
        truncated = truncate_prediction(pred, DecisionConfig(ct=ct))
        kept = truncated.depth
        return list(truncated.labels), [round(g, 6) for g in pred.step_gini[:kept]]
    if isinstance(pred, Path):
        return list(pred.labels), [1.0] * pred.depth
    if pred is None:
        return [], []
    raise TypeError(f"unexpected prediction type {type(pred).__name__}")


def create_app(artifacts: ServiceArtifacts | None) -> FastAPI:
    """Build the service; pass None to get a not-ready app that 503s."""
    app = FastAPI(title="facetpath service")
    app.state.artifacts = artifacts
    app.state.metrics = _Metrics()
    app.state.cache = LruCache(artifacts.cache_capacity if artifacts else 1)
    # The tuner UI is served separately during development; the service
    # holds nothing sensitive, so cross-origin reads are fine.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        app.state.metrics.errors_total += 1
        return JSONResponse(status_code=400, content={"detail": str(exc.errors()[:3])})

    def _ready() -> ServiceArtifacts | None:
        return app.state.artifacts

    def _unavailable():
        return JSONResponse(status_code=503, content={"detail": "models not loaded"})

    @app.get("/health")
    def health():
        metrics = app.state.metrics
        with metrics.lock:
            metrics.requests_total += 1
        art = _ready()
        if art is None:
            return _unavailable()
        return {
            "status": "ok",
            "models": sorted(art.predictors),
            "default_model": art.default_model,
            "ct": art.ct,
        }

    @app.get("/metrics")
    def metrics_endpoint():
        metrics = app.state.metrics
        with metrics.lock:
            metrics.requests_total += 1
        snap = metrics.snapshot()
        body = "".join(f"{k} {v:.6f}\n" if isinstance(v, float) else f"{k} {v}\n" for k, v in snap.items())
        return PlainTextResponse(body)

    @app.post("/augment")
    def augment(req: AugmentRequest):
        t_request = time.perf_counter()
        metrics = app.state.metrics
        with metrics.lock:
            metrics.requests_total += 1
            metrics.augment_requests_total += 1
        art = _ready()
        if art is None:
            return _unavailable()
        if not req.candidates:
            return JSONResponse(status_code=400, content={"detail": "candidates must be non-empty"})
        if len(req.candidates) > art.max_candidates:
            return JSONResponse(
                status_code=400,
                content={"detail": f"at most {art.max_candidates} candidates per request"},
            )
        model_id = req.model_id or art.default_model
        if model_id not in art.predictors:
            return JSONResponse(status_code=400, content={"detail": f"unknown model {model_id!r}"})
        ct = art.ct if req.ct_override is None else req.ct_override
        if not 0.0 <= ct <= 1.0:
            return JSONResponse(status_code=400, content={"detail": "ct_override must be in [0, 1]"})

        predictor = art.predictors[model_id]
        sig = session_signature(req.session_products)
        # One session pooling per request; every candidate reuses it.
        svec = session_vector(req.session_products, art.session_table).values
        results = []
        hits = misses = 0
        for cand in req.candidates:
            t0 = time.perf_counter()
            key = (normalize_query(cand), sig, ct, model_id)
            cached = app.state.cache.get(key)
            if cached is not None:
                labels, ginis = cached
                hit = True
                hits += 1
            else:
                pred = predictor.predict(cand, req.session_products, session_vec=svec)
                labels, ginis = _prediction_payload(pred, ct, art.tree)
                app.state.cache.put(key, (labels, ginis))
                hit = False
                misses += 1
            results.append(
                {
                    "query": cand,
                    "path": labels,
                    "confidence": ginis,
                    "model_id": model_id,
                    "cache_hit": hit,
                    "latency_us": int((time.perf_counter() - t0) * 1e6),
                }
            )
        with metrics.lock:
            metrics.cache_hits_total += hits
            metrics.cache_misses_total += misses
            metrics.candidates_total += len(results)
            metrics.latencies_us.append(int((time.perf_counter() - t_request) * 1e6))
        return {"results": results, "ct": ct}

    @app.post("/simulate")
    def simulate(req: SimulateRequest):
        metrics = app.state.metrics
        with metrics.lock:
            metrics.requests_total += 1
        art = _ready()
        if art is None:
            return _unavailable()
        event = SearchEventGroup(
            event_id="adhoc",
            timestamp=0,
            query="",
            session_products=(),
            result_set=tuple(req.result_set),
            clicked=tuple(req.clicked),
        )
        sim = simulate_event(event, Path(tuple(req.predicted_path)), art.tree)
        return {
            "tp": sim.tp,
            "fp": sim.fp,
            "fn": sim.fn,
            "precision": sim.precision,
            "recall": sim.recall,
            "excluded": sim.excluded,
        }

    @app.get("/sweep")
    def sweep():
        metrics = app.state.metrics
        with metrics.lock:
            metrics.requests_total += 1
        art = _ready()
        if art is None:
            return _unavailable()
        return {"rows": art.sweep_rows, "events": art.trace_sample, "default_ct": art.ct}

    @app.get("/catalog")
    def catalog(limit: int = 50):
        metrics = app.state.metrics
        with metrics.lock:
            metrics.requests_total += 1
        art = _ready()
        if art is None:
            return _unavailable()
        limit = max(1, min(limit, 500))
        items = [
            {"product_id": pid, "path": list(path.labels)}
            for pid, path in sorted(art.tree.product_to_path.items())[:limit]
        ]
        return {"products": items, "total": len(art.tree.product_to_path)}

    return app
