"""HTTP facade for the annotation study.

JSON API: GET /config, GET /qualification, POST /qualification/{worker},
GET /hit?worker=..., POST /hit/{hit_id}/response, GET /export/annotations
(admin), POST /admin/... pool management (admin), and static /videos.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .store import (
    IncompleteResponse,
    NotQualified,
    PoolExhausted,
    StudyError,
    StudyStore,
    UnknownWorker,
)


class QualificationSubmission(BaseModel):
    mcq_answers: dict[str, str]
    gold_answers: dict[str, str]
    client_hints: dict[str, Any] = Field(default_factory=dict)


class ResponseSubmission(BaseModel):
    worker_id: str
    answers: dict[str, str]
    client_hints: dict[str, Any] = Field(default_factory=dict)


class PayloadPairIn(BaseModel):
    prompt_id: str
    video_a: str
    video_b: str
    url_a: str
    url_b: str


class GoldPairIn(BaseModel):
    gold_id: str
    url_a: str
    url_b: str
    answers: dict[str, str]
    mcq: dict[str, Any] | None = None


class SanityItemIn(BaseModel):
    sanity_id: str
    url_a: str
    url_b: str
    mcqs: list[dict[str, Any]]


class QualificationBatteryIn(BaseModel):
    mcqs: list[dict[str, Any]]
    gold_pairs: list[dict[str, Any]]


def create_app(
    store: StudyStore,
    videos_dir: str | Path | None = None,
    admin_token: str = "",
) -> FastAPI:
    app = FastAPI(title="dyneval study server")

    def require_admin(authorization: str = Header(default="")) -> None:
        if not admin_token:
            raise HTTPException(503, "admin token not configured")
        if authorization != f"Bearer {admin_token}":
            raise HTTPException(401, "admin token required")

    @app.get("/config")
    def config() -> dict[str, Any]:
        return {
            "dimensions": ["background", "foreground"],
            "videos_base": "/videos",
            "pages_per_hit": 20,
        }

    @app.get("/qualification")
    def qualification_form() -> dict[str, Any]:
        try:
            return store.qualification_form()
        except StudyError as exc:
            raise HTTPException(503, str(exc)) from exc

    @app.post("/qualification/{worker_id}")
    def submit_qualification(worker_id: str, body: QualificationSubmission) -> dict[str, Any]:
        try:
            return store.grade_qualification(
                worker_id, body.mcq_answers, body.gold_answers, body.client_hints
            )
        except IncompleteResponse as exc:
            raise HTTPException(400, str(exc)) from exc
        except StudyError as exc:
            raise HTTPException(503, str(exc)) from exc

    @app.get("/hit")
    def get_hit(worker: str = Query(...), seed: int = Query(default=0)) -> dict[str, Any]:
        try:
            open_hit = store.open_hit_for(worker)
            if open_hit is not None:
                return open_hit
            return store.assemble_hit(worker, seed)
        except UnknownWorker as exc:
            raise HTTPException(403, f"unknown worker {exc}") from exc
        except NotQualified as exc:
            raise HTTPException(403, f"worker {exc} is not qualified") from exc
        except PoolExhausted as exc:
            raise HTTPException(409, str(exc)) from exc

    @app.post("/hit/{hit_id}/response")
    def submit_response(hit_id: str, body: ResponseSubmission) -> dict[str, Any]:
        try:
            return store.score_response(hit_id, body.worker_id, body.answers)
        except IncompleteResponse as exc:
            raise HTTPException(400, str(exc)) from exc
        except StudyError as exc:
            raise HTTPException(409, str(exc)) from exc

    @app.get("/export/annotations", dependencies=[Depends(require_admin)])
    def export_annotations() -> list[dict[str, Any]]:
        return store.export_annotations()

    @app.post("/admin/pairs", dependencies=[Depends(require_admin)])
    def add_pairs(body: list[PayloadPairIn]) -> dict[str, int]:
        return {"added": store.add_payload_pairs([p.model_dump() for p in body])}

    @app.post("/admin/gold", dependencies=[Depends(require_admin)])
    def add_gold(body: list[GoldPairIn]) -> dict[str, int]:
        try:
            return {"added": store.add_gold_pairs([g.model_dump() for g in body])}
        except StudyError as exc:
            raise HTTPException(400, str(exc)) from exc

    @app.post("/admin/sanity", dependencies=[Depends(require_admin)])
    def add_sanity(body: list[SanityItemIn]) -> dict[str, int]:
        try:
            return {"added": store.add_sanity_items([s.model_dump() for s in body])}
        except StudyError as exc:
            raise HTTPException(400, str(exc)) from exc

    @app.post("/admin/qualification", dependencies=[Depends(require_admin)])
    def set_qualification(body: QualificationBatteryIn) -> dict[str, bool]:
        try:
            store.set_qualification_battery(body.model_dump())
        except StudyError as exc:
            raise HTTPException(400, str(exc)) from exc
        return {"ok": True}

    if videos_dir is not None:
        app.mount("/videos", StaticFiles(directory=str(videos_dir)), name="videos")

    return app
