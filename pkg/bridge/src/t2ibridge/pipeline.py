"""Generation and detection passes, prompt manifest handling.

The bridge reads the prompt JSONL that `expand-prompts` writes, generates K
images per prompt occurrence, detects concepts in each image, and emits one
record stream. Per-image failures never abort a batch: a failed image
becomes a record with no detections and an error annotation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import wire
from .backends import get_backend
from .config import MODE_VQA_LABEL, BridgeConfig
from .detectors import get_detector
from .scene import derive_seed


class PromptFileError(ValueError):
    pass


@dataclass(frozen=True)
class PromptJob:
    prompt_id: str
    text: str
    weight: float
    provenance: str
    occurrences: int = 1  # duplicate manifest lines mean more samples


@dataclass
class ManifestEntry:
    prompt_id: str
    sample_index: int
    image_id: str
    path: Path | None
    width: int
    height: int
    seed: int
    error: str | None = None


@dataclass
class BatchResult:
    entries: list[ManifestEntry] = field(default_factory=list)
    failures: int = 0


def load_prompt_jobs(path: str | Path) -> list[PromptJob]:
    """Parse a prompt JSONL manifest; repeated prompt lines accumulate."""
    jobs: dict[str, PromptJob] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise PromptFileError(f"cannot read prompts {path}: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PromptFileError(f"{path}:{line_no}: not JSON: {exc}") from exc
        if doc.get("kind") != "prompt":
            raise PromptFileError(f"{path}:{line_no}: expected a prompt line")
        prompt_id = str(doc["prompt_id"])
        known = jobs.get(prompt_id)
        if known is None:
            jobs[prompt_id] = PromptJob(
                prompt_id=prompt_id,
                text=str(doc["text"]),
                weight=float(doc.get("weight", 1.0)),
                provenance=str(doc.get("provenance", "empirical")),
            )
        else:
            if known.text != doc["text"]:
                raise PromptFileError(
                    f"{path}:{line_no}: prompt {prompt_id!r} repeats with different text"
                )
            jobs[prompt_id] = PromptJob(
                prompt_id=prompt_id, text=known.text, weight=known.weight,
                provenance=known.provenance, occurrences=known.occurrences + 1,
            )
    if not jobs:
        raise PromptFileError(f"{path}: no prompt lines")
    return [jobs[prompt_id] for prompt_id in sorted(jobs)]


def generate_images(jobs: list[PromptJob], config: BridgeConfig,
                    media_dir: str | Path | None) -> BatchResult:
    """K images per prompt occurrence, written as PNGs when media_dir given."""
    backend = get_backend(config)
    media_dir = Path(media_dir) if media_dir else None
    if media_dir:
        media_dir.mkdir(parents=True, exist_ok=True)
    result = BatchResult()
    for job in jobs:
        samples = config.k * job.occurrences
        for sample_index in range(samples):
            seed = derive_seed(config.seed, job.prompt_id, sample_index)
            image_id = f"{job.prompt_id}-{sample_index:04d}"
            entry = ManifestEntry(
                prompt_id=job.prompt_id,
                sample_index=sample_index,
                image_id=image_id,
                path=None,
                width=config.image_size,
                height=config.image_size,
                seed=seed,
            )
            try:
                img = backend.generate(job.text, seed)
                entry.width, entry.height = img.size
                if media_dir:
                    entry.path = media_dir / f"{image_id}.png"
                    img.save(entry.path)
                else:
                    entry.path = None
                    entry.image = img  # type: ignore[attr-defined]
            except Exception as exc:
                entry.error = f"generation failed: {exc}"
                result.failures += 1
            result.entries.append(entry)
    return result


def detect_images(batch: BatchResult, config: BridgeConfig) -> dict[str, list[dict]]:
    """Detections per image_id; failed images map to an empty list."""
    from PIL import Image

    detector = get_detector(config)
    detections: dict[str, list[dict]] = {}
    for entry in batch.entries:
        if entry.error is not None:
            detections[entry.image_id] = []
            continue
        try:
            img = getattr(entry, "image", None)
            if img is None:
                img = Image.open(entry.path)
            detections[entry.image_id] = detector.detect(img)
        except Exception as exc:
            entry.error = f"detection failed: {exc}"
            batch.failures += 1
            detections[entry.image_id] = []
    return detections


def build_record_lines(jobs: list[PromptJob], batch: BatchResult,
                       detections: dict[str, list[dict]],
                       config: BridgeConfig) -> list[str]:
    """Assemble the full record stream in the workbench wire format."""
    created_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    lines = [wire.header_line(
        run_id=config.effective_run_id,
        generator_id=config.generator_id,
        detector_id=config.detector_id,
        k_nominal=config.k,
        config_digest=config.digest(),
        created_at=created_at,
    )]
    for job in jobs:
        lines.append(wire.prompt_line(job.prompt_id, job.text, job.weight,
                                      job.provenance))
    pixel_boxes = config.detector_mode != MODE_VQA_LABEL
    for entry in batch.entries:
        lines.append(wire.image_line(
            image_id=entry.image_id,
            prompt_id=entry.prompt_id,
            sample_index=entry.sample_index,
            detections=detections.get(entry.image_id, []),
            image_uri=entry.path.name if entry.path else None,
            image_width=entry.width if pixel_boxes else None,
            image_height=entry.height if pixel_boxes else None,
            error=entry.error,
        ))
    return lines


def run_bridge(prompts_path: str | Path, config: BridgeConfig,
               out_path: str | Path,
               media_dir: str | Path | None) -> BatchResult:
    """Full pass: prompts -> images -> detections -> validated record file."""
    jobs = load_prompt_jobs(prompts_path)
    batch = generate_images(jobs, config, media_dir)
    detections = detect_images(batch, config)
    lines = build_record_lines(jobs, batch, detections, config)
    wire.write_records(lines, out_path)
    return batch
