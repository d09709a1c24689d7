"""Domain model: labels, detections, prompts, images, and the audit corpus.

Everything downstream (metrics, mining, reporting, the HTTP API) consumes
the types defined here. All types are immutable once a corpus is built, so
they can be shared freely across threads.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    BoxOutOfRange,
    CorpusIntegrityError,
    EmptyLabel,
    ValidationError,
)

PROVENANCE_TEMPLATE = "template"
PROVENANCE_EMPIRICAL = "empirical"


def fold_text(raw: str) -> str:
    """NFC, lowercase, whitespace collapsed to single spaces, trimmed."""
    text = unicodedata.normalize("NFC", raw).lower()
    return " ".join(text.split())


def normalize_label(raw: str) -> str:
    """Canonicalize a detector label via fold_text.

    Normalization is idempotent; raises EmptyLabel when nothing is left.
    """
    text = fold_text(raw)
    if not text:
        raise EmptyLabel(f"label {raw!r} is empty after normalization")
    return text


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Axis-aligned box in normalized image coordinates, origin top-left."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (0.0 <= self.x0 < self.x1 <= 1.0 and 0.0 <= self.y0 < self.y1 <= 1.0):
            raise BoxOutOfRange(
                f"box ({self.x0}, {self.y0}, {self.x1}, {self.y1}) violates "
                "0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1"
            )

    @classmethod
    def from_pixels(cls, x0: float, y0: float, x1: float, y1: float,
                    width: int, height: int) -> "BoundingBox":
        """Convert pixel coordinates into normalized coordinates."""
        if width <= 0 or height <= 0:
            raise BoxOutOfRange(f"image dimensions {width}x{height} are not positive")
        return cls(x0 / width, y0 / height, x1 / width, y1 / height)

    def as_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class Detection:
    """One localized concept in one image."""

    label: str  # normalized via normalize_label
    box: BoundingBox
    score: float = 1.0  # detectors without scores default to certainty

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class ImageRecord:
    """One generated image and the concepts detected in it."""

    image_id: str
    prompt_id: str
    sample_index: int
    detections: tuple[Detection, ...]
    image_uri: str | None = None
    detector_id: str = ""

    def __post_init__(self):
        if self.sample_index < 0:
            raise CorpusIntegrityError(
                f"image {self.image_id}: sample_index must be >= 0"
            )


def presence_set(image: ImageRecord) -> frozenset[str]:
    """Deduplicated concept labels of an image.

    Presence semantics: several boxes for the same label count once. The
    full detections stay available on the record for localization display.
    """
    return frozenset(d.label for d in image.detections)


@dataclass(frozen=True)
class PromptRecord:
    """One prompt of the audited distribution."""

    prompt_id: str
    text: str
    weight: float = 1.0
    provenance: str = PROVENANCE_TEMPLATE

    def __post_init__(self):
        if self.weight < 0:
            raise CorpusIntegrityError(f"prompt {self.prompt_id}: weight must be >= 0")
        if self.provenance not in (PROVENANCE_TEMPLATE, PROVENANCE_EMPIRICAL):
            raise CorpusIntegrityError(
                f"prompt {self.prompt_id}: provenance must be "
                f"'{PROVENANCE_TEMPLATE}' or '{PROVENANCE_EMPIRICAL}'"
            )


@dataclass(frozen=True)
class RunMetadata:
    """Provenance of one generation + detection run."""

    generator_id: str
    detector_id: str
    K_nominal: int
    created_at: str = ""  # ISO-8601, empty when unknown
    config_digest: str = ""

    def __post_init__(self):
        if self.K_nominal < 1:
            raise CorpusIntegrityError("K_nominal must be >= 1")


@dataclass(frozen=True)
class AuditCorpus:
    """Indexed collection of prompts, images, and detections for one run.

    ``presence`` maps each concept to the frozenset of image_ids containing
    it; ``images_by_prompt`` lists each prompt's image_ids sorted by
    sample_index. Both are derived at construction and never mutated.
    """

    run_id: str
    prompts: Mapping[str, PromptRecord]
    images: Mapping[str, ImageRecord]
    metadata: RunMetadata
    presence: Mapping[str, frozenset[str]] = field(compare=False)
    images_by_prompt: Mapping[str, tuple[str, ...]] = field(compare=False)

    @property
    def total_images(self) -> int:
        return len(self.images)

    @property
    def concepts(self) -> list[str]:
        """All concepts present anywhere, sorted."""
        return sorted(self.presence)

    def presence_of(self, image_id: str) -> frozenset[str]:
        return presence_set(self.images[image_id])


def build_presence_index(images: Iterable[ImageRecord]) -> dict[str, frozenset[str]]:
    """concept -> set of image_ids whose presence set contains it."""
    index: dict[str, set[str]] = {}
    for img in images:
        for label in presence_set(img):
            index.setdefault(label, set()).add(img.image_id)
    return {label: frozenset(ids) for label, ids in index.items()}


def build_corpus(run_id: str,
                 prompts: Iterable[PromptRecord],
                 images: Iterable[ImageRecord],
                 metadata: RunMetadata) -> AuditCorpus:
    """Validate referential integrity and uniqueness, then index.

    Raises CorpusIntegrityError on a dangling prompt_id, duplicate image_id,
    duplicate prompt_id, or duplicate (prompt_id, sample_index).
    """
    prompt_map: dict[str, PromptRecord] = {}
    for p in prompts:
        if p.prompt_id in prompt_map:
            raise CorpusIntegrityError(f"duplicate prompt_id {p.prompt_id!r}")
        prompt_map[p.prompt_id] = p

    image_map: dict[str, ImageRecord] = {}
    seen_samples: set[tuple[str, int]] = set()
    for img in images:
        if img.image_id in image_map:
            raise CorpusIntegrityError(f"duplicate image_id {img.image_id!r}")
        if img.prompt_id not in prompt_map:
            raise CorpusIntegrityError(
                f"image {img.image_id!r} references unknown prompt {img.prompt_id!r}"
            )
        key = (img.prompt_id, img.sample_index)
        if key in seen_samples:
            raise CorpusIntegrityError(
                f"image {img.image_id!r} duplicates sample {key}"
            )
        seen_samples.add(key)
        image_map[img.image_id] = img

    by_prompt: dict[str, list[str]] = {pid: [] for pid in prompt_map}
    for img in sorted(image_map.values(), key=lambda i: (i.prompt_id, i.sample_index)):
        by_prompt[img.prompt_id].append(img.image_id)

    return AuditCorpus(
        run_id=run_id,
        prompts=prompt_map,
        images=image_map,
        metadata=metadata,
        presence=build_presence_index(image_map.values()),
        images_by_prompt={pid: tuple(ids) for pid, ids in by_prompt.items()},
    )
