"""Request/response models of the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel


class RunSummary(BaseModel):
    run_id: str
    generator_id: str
    detector_id: str
    K_nominal: int
    created_at: str
    config_digest: str
    total_images: int
    total_prompts: int


class RunsPage(BaseModel):
    total: int
    offset: int
    limit: int
    items: list[RunSummary]


class ConceptRow(BaseModel):
    label: str
    count: int
    p: float
    sigma: float
    cv: float
    classification: str


class ConceptsPage(BaseModel):
    total: int
    offset: int
    limit: int
    sort: str
    filter: str
    tau: float
    cv_cutoff: float
    items: list[ConceptRow]


class PromptHit(BaseModel):
    prompt_id: str
    text: str
    image_count: int


class EvidenceImage(BaseModel):
    image_id: str
    image_uri: str | None
    media_url: str | None
    boxes: list[list[float]]
    scores: list[float]


class PartnerOut(BaseModel):
    partner: str
    joint_count: int
    support: float
    confidence: float
    confidence_rev: float
    lift: float


class ConceptDetail(BaseModel):
    run_id: str
    label: str
    count: int
    p: float
    prompt_hits: list[PromptHit]
    evidence: list[EvidenceImage]
    partners: list[PartnerOut]


class CoocResponse(BaseModel):
    run_id: str
    concept: str
    metric: str
    k: int
    min_support: float
    items: list[PartnerOut]


class DiffRowOut(BaseModel):
    label: str
    p_a: float
    p_b: float
    delta: float


class CompareResponse(BaseModel):
    a: str
    b: str
    floor: float
    total: int
    offset: int
    limit: int
    deltas: list[DiffRowOut]
    only_a: list[str]
    only_b: list[str]


class ErrorInfo(BaseModel):
    code: str
    message: str


class ErrorBody(BaseModel):
    error: ErrorInfo
