"""HTTP service: upload a photo, get the full dating result.

Pipeline per request: decode and resize -> normalize -> classifier
forward pass -> top-4 decision -> feature-part detection -> reference
retrieval. Detector failures and an empty reference index degrade
softly (empty lists plus a warning) instead of failing the request.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from dingdate import policy
from dingdate.catalog import CatalogStore, NotFoundError
from dingdate.config import ServiceConfig
from dingdate.detect import (
    BackendProtocolError,
    BackendUnavailableError,
    DetectorBackend,
    RemoteDetector,
    StubDetector,
    postprocess,
)
from dingdate.imageproc import (
    CorruptImageError,
    UnsupportedFormatError,
    decode_and_resize,
    sniff_format,
    to_model_input,
)
from dingdate.nn.model import Model
from dingdate.nn.kernels import softmax
from dingdate.nn.weights import load_weights
from dingdate.policy import EmbeddingIndex, build_index, load_index

DETECTOR_HEALTH_TTL_S = 30.0


@dataclass
class ServiceState:
    """Everything a request handler reads; swapped atomically on reload."""

    config: ServiceConfig
    model: Model | None = None
    catalog: CatalogStore | None = None
    index: EmbeddingIndex | None = None
    detector: DetectorBackend = field(default_factory=StubDetector)
    _inference_slots: threading.BoundedSemaphore = field(init=False)
    _detector_health: tuple[float, bool] | None = field(default=None, init=False)
    _health_lock: threading.Lock = field(default_factory=threading.Lock, init=False)

    def __post_init__(self) -> None:
        self._inference_slots = threading.BoundedSemaphore(
            self.config.inference_concurrency
        )

    def detector_ok(self) -> bool:
        """Cached reachability flag, refreshed at most every 30 s."""
        now = time.monotonic()
        with self._health_lock:
            if (
                self._detector_health is not None
                and now - self._detector_health[0] < DETECTOR_HEALTH_TTL_S
            ):
                return self._detector_health[1]
        ok = True
        probe = getattr(self.detector, "reachable", None)
        if callable(probe):
            ok = bool(probe())
        with self._health_lock:
            self._detector_health = (now, ok)
        return ok


def build_state(config: ServiceConfig) -> ServiceState:
    """Load weights, catalog, and index named by the config."""
    model = None
    if config.weights:
        model = load_weights(config.weights)
    catalog = None
    if config.catalog:
        catalog = CatalogStore(config.catalog, create=False)
    index = None
    if config.index and Path(config.index).is_file():
        index = load_index(config.index)
    elif catalog is not None:
        pairs = catalog.embedding_pairs()
        if pairs:
            index = build_index(pairs)
    detector: DetectorBackend
    if config.detector_url:
        detector = RemoteDetector(config.detector_url, config.detector_timeout_ms)
    else:
        detector = StubDetector()
    return ServiceState(config=config, model=model, catalog=catalog, index=index,
                        detector=detector)


def _decision_payload(decision: policy.DatingDecision) -> dict:
    return {
        "outcome": decision.outcome.value,
        "ranked": [
            {"period": str(period), "probability": prob}
            for period, prob in decision.ranked
        ],
        "top1_probability": decision.top1_probability,
    }


def run_pipeline(state: ServiceState, data: bytes) -> dict:
    """Full inference pipeline over decoded upload bytes."""
    config = state.config
    model = state.model
    assert model is not None
    timing: dict[str, float] = {}
    warnings: list[str] = []

    t0 = time.perf_counter()
    size = model.config.input_size
    image = decode_and_resize(data, size, size)
    tensor = to_model_input(image, config.normalize_mean, config.normalize_std)
    timing["preprocess"] = (time.perf_counter() - t0) * 1000

    t1 = time.perf_counter()
    with state._inference_slots:
        logits, embedding = model.forward(tensor.values)
    probabilities = softmax(logits)
    timing["forward"] = (time.perf_counter() - t1) * 1000

    t2 = time.perf_counter()
    decision = policy.decide(probabilities, config.other_stuffs_threshold)
    timing["decide"] = (time.perf_counter() - t2) * 1000

    t3 = time.perf_counter()
    boxes = []
    try:
        raw = state.detector.detect(image)
        boxes = postprocess(raw, config.score_threshold, config.max_boxes)
    except (BackendUnavailableError, BackendProtocolError) as exc:
        warnings.append(f"detector_unavailable: {exc}")
    timing["detect"] = (time.perf_counter() - t3) * 1000

    t4 = time.perf_counter()
    references = []
    if state.index is None or len(state.index) == 0:
        warnings.append("reference_index_empty")
    else:
        references = policy.query_references(state.index, embedding, config.reference_k)
    timing["retrieve"] = (time.perf_counter() - t4) * 1000
    timing["total"] = (time.perf_counter() - t0) * 1000

    return {
        "decision": _decision_payload(decision),
        "boxes": [
            {
                "label": b.label.value,
                "score": b.score,
                "x0": b.x0, "y0": b.y0, "x1": b.x1, "y1": b.y1,
            }
            for b in boxes
        ],
        "references": [
            {
                "artifact_id": hit.artifact_id,
                "similarity": hit.similarity,
                "image_url": f"/api/v1/artifacts/{hit.artifact_id}/image",
            }
            for hit in references
        ],
        "model_descriptor": f"{model.descriptor()}|det:{state.detector.descriptor}",
        "timing_ms": timing,
        "warnings": warnings,
    }


def _media_type_for(data: bytes) -> str:
    fmt = sniff_format(data)
    return {"jpeg": "image/jpeg", "png": "image/png"}.get(fmt or "", "application/octet-stream")


def create_app(state: ServiceState, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="dingdate", version="0.1.0")
    app.state.service = state

    @app.post("/api/v1/date")
    async def date_artifact(image: UploadFile = File(...)) -> JSONResponse:
        svc: ServiceState = app.state.service
        cap = svc.config.max_upload_bytes
        data = await image.read(cap + 1)
        if len(data) > cap:
            raise HTTPException(status_code=413, detail="upload exceeds size cap")
        if svc.model is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        if sniff_format(data) is None:
            raise HTTPException(status_code=415, detail="only JPEG and PNG accepted")
        if svc.config.retain_uploads and svc.config.retain_dir:
            retain_dir = Path(svc.config.retain_dir)
            retain_dir.mkdir(parents=True, exist_ok=True)
            stamp = time.strftime("%Y%m%d-%H%M%S")
            (retain_dir / f"upload-{stamp}-{time.monotonic_ns()}.bin").write_bytes(data)
        try:
            body = run_pipeline(svc, data)
        except UnsupportedFormatError as exc:
            raise HTTPException(status_code=415, detail=str(exc)) from exc
        except CorruptImageError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return JSONResponse(body)

    @app.get("/api/v1/artifacts/{artifact_id}")
    def get_artifact(artifact_id: str) -> JSONResponse:
        svc: ServiceState = app.state.service
        if svc.catalog is None:
            raise HTTPException(status_code=404, detail="no catalog loaded")
        try:
            record = svc.catalog.get_artifact(artifact_id)
        except NotFoundError:
            raise HTTPException(status_code=404, detail="unknown artifact") from None
        return JSONResponse(
            {
                "id": record.id,
                "period": str(record.period),
                "shape": record.shape,
                "literature": record.literature,
                "excavation": record.excavation,
                "museum": record.museum,
                "image_url": f"/api/v1/artifacts/{record.id}/image",
            }
        )

    @app.get("/api/v1/artifacts/{artifact_id}/image")
    def get_artifact_image(artifact_id: str) -> Response:
        svc: ServiceState = app.state.service
        if svc.catalog is None:
            raise HTTPException(status_code=404, detail="no catalog loaded")
        try:
            record = svc.catalog.get_artifact(artifact_id)
            data = svc.catalog.open_image(record.image_ref)
        except NotFoundError:
            raise HTTPException(status_code=404, detail="unknown artifact") from None
        return Response(content=data, media_type=_media_type_for(data))

    @app.get("/healthz")
    def healthz() -> JSONResponse:
        svc: ServiceState = app.state.service
        return JSONResponse(
            {
                "model_loaded": svc.model is not None,
                "model_descriptor": svc.model.descriptor() if svc.model else None,
                "catalog_size": len(svc.catalog) if svc.catalog else 0,
                "index_size": len(svc.index) if svc.index else 0,
                "detector_ok": svc.detector_ok(),
            }
        )

    @app.post("/api/v1/admin/reload")
    def reload_state() -> JSONResponse:
        fresh = build_state(app.state.service.config)
        app.state.service = fresh  # atomic swap; in-flight requests keep the old state
        return JSONResponse(
            {
                "reloaded": True,
                "catalog_size": len(fresh.catalog) if fresh.catalog else 0,
                "index_size": len(fresh.index) if fresh.index else 0,
            }
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
