"""Read-only HTTP API over loaded corpora.

Every number returned here comes from the same engine calls the CLI uses,
so API responses and CLI reports agree bit-for-bit. No endpoint mutates a
corpus; list endpoints are paginated (offset/limit) with stable totals.
Stability is exposed as the CV-based classification; no separate
persistence score is defined.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse

from ..core import fold_text, normalize_label
from ..errors import EmptyLabel, UnknownConcept, ValidationError
from ..metrics import DEFAULT_CV_CUTOFF, DEFAULT_TAU
from ..mining import DEFAULT_EVIDENCE_CAP, METRIC_SUPPORT, RANK_METRICS
from ..reporting import DEFAULT_PARTNER_K
from . import schemas
from .state import ServerState

SORT_KEYS = ("p", "cv", "count")
DEFAULT_LIMIT = 100


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _not_found(code: str, message: str) -> ApiError:
    return ApiError(404, code, message)


def _bad_param(message: str) -> ApiError:
    return ApiError(400, "bad_param", message)


def create_app(state: ServerState, cors_origin: str | None = None,
               ui_root: str | Path | None = None) -> FastAPI:
    app = FastAPI(
        title="conceptaudit",
        description="Read-only concept statistics over audit corpora.",
        version="0.1.0",
    )
    if cors_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(ValidationError)
    async def _validation_error(_: Request, exc: ValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "bad_param", "message": str(exc)}},
        )

    def get_corpus(run_id: str):
        corpus = state.corpus(run_id)
        if corpus is None:
            raise _not_found("unknown_run", f"run {run_id!r} is not loaded")
        return corpus

    def normalize_or_400(label: str) -> str:
        try:
            return normalize_label(label)
        except EmptyLabel as exc:
            raise _bad_param(str(exc))

    def check_page(offset: int, limit: int) -> None:
        if offset < 0:
            raise _bad_param("offset must be >= 0")
        if limit < 1:
            raise _bad_param("limit must be >= 1")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/runs", response_model=schemas.RunsPage)
    def list_runs(offset: int = 0, limit: int = DEFAULT_LIMIT):
        check_page(offset, limit)
        run_ids = state.run_ids()
        items = []
        for run_id in run_ids[offset:offset + limit]:
            corpus = state.corpora[run_id]
            meta = corpus.metadata
            items.append(schemas.RunSummary(
                run_id=run_id,
                generator_id=meta.generator_id,
                detector_id=meta.detector_id,
                K_nominal=meta.K_nominal,
                created_at=meta.created_at,
                config_digest=meta.config_digest,
                total_images=len(corpus.images),
                total_prompts=len(corpus.prompts),
            ))
        return schemas.RunsPage(total=len(run_ids), offset=offset, limit=limit,
                                items=items)

    @app.get("/runs/{run_id}/concepts", response_model=schemas.ConceptsPage)
    def list_concepts(run_id: str,
                      sort: str = "p",
                      filter: str = "",
                      tau: float = DEFAULT_TAU,
                      cv_cutoff: float = DEFAULT_CV_CUTOFF,
                      offset: int = 0,
                      limit: int = DEFAULT_LIMIT):
        get_corpus(run_id)
        if sort not in SORT_KEYS:
            raise _bad_param(f"sort must be one of {SORT_KEYS}, got {sort!r}")
        if not (0.0 <= tau < 1.0):
            raise _bad_param(f"tau must be in [0,1), got {tau}")
        if cv_cutoff <= 0:
            raise _bad_param(f"cv_cutoff must be > 0, got {cv_cutoff}")
        check_page(offset, limit)

        freq = state.frequency(run_id)
        stability = state.stability(run_id, tau, cv_cutoff)
        rows = [
            schemas.ConceptRow(
                label=s.label,
                count=freq.rows[s.label].count,
                p=s.p,
                sigma=s.sigma,
                cv=s.cv,
                classification=s.classification,
            )
            for s in stability.rows.values()
        ]
        needle = fold_text(filter)
        if needle:
            rows = [r for r in rows if needle in r.label]
        key = {
            "p": lambda r: (-r.p, r.label),
            "cv": lambda r: (-r.cv, r.label),
            "count": lambda r: (-r.count, r.label),
        }[sort]
        rows.sort(key=key)
        return schemas.ConceptsPage(
            total=len(rows), offset=offset, limit=limit, sort=sort,
            filter=filter, tau=tau, cv_cutoff=cv_cutoff,
            items=rows[offset:offset + limit],
        )

    @app.get("/runs/{run_id}/concepts/{label}", response_model=schemas.ConceptDetail)
    def concept_detail(run_id: str, label: str,
                       k: int = DEFAULT_PARTNER_K,
                       metric: str = METRIC_SUPPORT,
                       min_support: float = 0.0,
                       evidence_cap: int = DEFAULT_EVIDENCE_CAP):
        corpus = get_corpus(run_id)
        name = normalize_or_400(label)
        if metric not in RANK_METRICS:
            raise _bad_param(f"metric must be one of {RANK_METRICS}, got {metric!r}")
        if k < 1:
            raise _bad_param("k must be >= 1")
        freq = state.frequency(run_id)
        row = freq.rows.get(name)
        if row is None:
            raise _not_found("unknown_concept", f"concept {name!r} not in run {run_id!r}")
        entry = state.reverse(run_id, name, evidence_cap)
        try:
            partners = state.partners(run_id, name, k, metric, min_support)
        except UnknownConcept:
            partners = []
        return schemas.ConceptDetail(
            run_id=run_id,
            label=name,
            count=row.count,
            p=row.p,
            prompt_hits=[
                schemas.PromptHit(
                    prompt_id=pid,
                    text=corpus.prompts[pid].text,
                    image_count=n,
                )
                for pid, n in entry.prompt_hits
            ],
            evidence=[
                schemas.EvidenceImage(
                    image_id=e.image_id,
                    image_uri=e.image_uri,
                    media_url=(f"/media/{e.image_id}?run={run_id}"
                               if e.image_uri else None),
                    boxes=[b.as_list() for b in e.boxes],
                    scores=list(e.scores),
                )
                for e in entry.evidence
            ],
            partners=[_partner_out(p) for p in partners],
        )

    @app.get("/runs/{run_id}/cooccurrence", response_model=schemas.CoocResponse)
    def cooccurrence_view(run_id: str,
                          c: str = Query(..., description="anchor concept label"),
                          k: int = DEFAULT_PARTNER_K,
                          metric: str = METRIC_SUPPORT,
                          min_support: float = 0.0):
        get_corpus(run_id)
        name = normalize_or_400(c)
        if metric not in RANK_METRICS:
            raise _bad_param(f"metric must be one of {RANK_METRICS}, got {metric!r}")
        if k < 1:
            raise _bad_param("k must be >= 1")
        if not (0.0 <= min_support <= 1.0):
            raise _bad_param("min_support must be in [0,1]")
        try:
            partners = state.partners(run_id, name, k, metric, min_support)
        except UnknownConcept as exc:
            raise _not_found("unknown_concept", str(exc))
        return schemas.CoocResponse(
            run_id=run_id, concept=name, metric=metric, k=k,
            min_support=min_support,
            items=[_partner_out(p) for p in partners],
        )

    @app.get("/compare", response_model=schemas.CompareResponse)
    def compare_view(a: str, b: str, floor: float = 0.05,
                     offset: int = 0, limit: int = DEFAULT_LIMIT):
        get_corpus(a)
        get_corpus(b)
        if not (0.0 <= floor <= 1.0):
            raise _bad_param(f"floor must be in [0,1], got {floor}")
        check_page(offset, limit)
        diff = state.diff(a, b, floor)
        return schemas.CompareResponse(
            a=a, b=b, floor=floor,
            total=len(diff.deltas), offset=offset, limit=limit,
            deltas=[
                schemas.DiffRowOut(label=d.label, p_a=d.p_a, p_b=d.p_b, delta=d.delta)
                for d in diff.deltas[offset:offset + limit]
            ],
            only_a=list(diff.only_a),
            only_b=list(diff.only_b),
        )

    @app.get("/media/{image_id}")
    def media(image_id: str, run: str | None = None):
        if state.media_root is None:
            raise _not_found("media_disabled", "server started without --media-root")
        run_ids = [run] if run else state.run_ids()
        for run_id in run_ids:
            corpus = state.corpus(run_id)
            if corpus is None:
                continue
            img = corpus.images.get(image_id)
            if img is None or not img.image_uri:
                continue
            root = state.media_root.resolve()
            candidate = (root / img.image_uri).resolve()
            if not candidate.is_relative_to(root):
                raise _not_found("media_missing", "image path escapes media root")
            if not candidate.is_file():
                raise _not_found("media_missing", f"no file for image {image_id!r}")
            return FileResponse(candidate)
        raise _not_found("unknown_image", f"image {image_id!r} not found")

    if ui_root:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_root), html=True), name="ui")

    return app


def _partner_out(p) -> schemas.PartnerOut:
    return schemas.PartnerOut(
        partner=p.partner,
        joint_count=p.joint_count,
        support=p.support,
        confidence=p.confidence,
        confidence_rev=p.confidence_rev,
        lift=p.lift,
    )
