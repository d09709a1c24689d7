"""Detection-record ingest, corpus persistence, and alias folding.

Record files are line-oriented JSON: one header line with run metadata,
then any number of body lines, each independently parseable:

    header: {"schema_version":1,"run_id":...,"generator_id":...,
             "detector_id":...,"K_nominal":...}
    prompt: {"kind":"prompt","prompt_id":...,"text":...,"weight":...,
             "provenance":"template"|"empirical"}
    image:  {"kind":"image","image_id":...,"prompt_id":...,"sample_index":...,
             "image_uri"?,"image_width"?,"image_height"?,
             "detections":[{"label":...,"box":[x0,y0,x1,y1],"score"?}]}

Boxes are normalized to [0,1]; a line carrying image_width/image_height
declares pixel coordinates, which are converted at ingest. Persisted
corpora reuse the same format (plus created_at/config_digest in the
header), so load(write(c)) == c.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .core import (
    AuditCorpus,
    BoundingBox,
    Detection,
    ImageRecord,
    PromptRecord,
    RunMetadata,
    build_corpus,
    normalize_label,
)
from .errors import (
    AliasCycle,
    BoxOutOfRange,
    BoxOutOfRangeLine,
    ConceptAuditError,
    CorpusIntegrityError,
    DuplicateImageId,
    DuplicatePromptId,
    DuplicateSampleIndex,
    EmptyLabel,
    IoFailure,
    LineError,
    MalformedLine,
    MissingHeader,
    UnknownPromptId,
    VersionMismatch,
)

SCHEMA_VERSION = 1


@dataclass
class IngestResult:
    """Corpus plus positioned diagnostics from one parse.

    Line accounting: body_lines == records + len(errors). Blank lines are
    ignored and counted on neither side.
    """

    corpus: AuditCorpus
    errors: list[LineError] = field(default_factory=list)
    body_lines: int = 0
    records: int = 0


def _parse_header(line: str) -> tuple[str, RunMetadata]:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLine(1, f"header is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc or "kind" in doc:
        raise MissingHeader("first line is not a header document")
    version = doc["schema_version"]
    if version != SCHEMA_VERSION:
        raise VersionMismatch(
            f"schema_version {version!r} not supported (reader accepts {SCHEMA_VERSION})"
        )
    try:
        run_id = str(doc["run_id"])
        metadata = RunMetadata(
            generator_id=str(doc["generator_id"]),
            detector_id=str(doc["detector_id"]),
            K_nominal=int(doc["K_nominal"]),
            created_at=str(doc.get("created_at", "")),
            config_digest=str(doc.get("config_digest", "")),
        )
    except (KeyError, TypeError, ValueError, CorpusIntegrityError) as exc:
        raise MalformedLine(1, f"bad header field: {exc}") from exc
    return run_id, metadata


def _parse_prompt_line(doc: dict, line_no: int) -> PromptRecord:
    try:
        return PromptRecord(
            prompt_id=str(doc["prompt_id"]),
            text=str(doc["text"]),
            weight=float(doc.get("weight", 1.0)),
            provenance=str(doc.get("provenance", "empirical")),
        )
    except (KeyError, TypeError, ValueError, CorpusIntegrityError) as exc:
        raise MalformedLine(line_no, f"bad prompt line: {exc}") from exc


def _parse_detection(entry: dict, line_no: int,
                     width: int | None, height: int | None) -> Detection:
    try:
        label = normalize_label(str(entry["label"]))
        box_vals = [float(v) for v in entry["box"]]
        if len(box_vals) != 4:
            raise ValueError("box must have 4 coordinates")
        score = float(entry.get("score", 1.0))
    except EmptyLabel as exc:
        raise MalformedLine(line_no, str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedLine(line_no, f"bad detection: {exc}") from exc
    try:
        if width is not None and height is not None:
            box = BoundingBox.from_pixels(*box_vals, width=width, height=height)
        else:
            box = BoundingBox(*box_vals)
        return Detection(label=label, box=box, score=score)
    except BoxOutOfRange as exc:
        raise BoxOutOfRangeLine(line_no, str(exc)) from exc
    except ConceptAuditError as exc:
        raise MalformedLine(line_no, str(exc)) from exc


def _parse_image_line(doc: dict, line_no: int) -> ImageRecord:
    width = doc.get("image_width")
    height = doc.get("image_height")
    if (width is None) != (height is None):
        raise MalformedLine(line_no, "image_width and image_height must come together")
    try:
        image_id = str(doc["image_id"])
        prompt_id = str(doc["prompt_id"])
        sample_index = int(doc["sample_index"])
        raw_detections = doc.get("detections", [])
        if not isinstance(raw_detections, list):
            raise ValueError("detections must be a list")
        uri = doc.get("image_uri")
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedLine(line_no, f"bad image line: {exc}") from exc
    detections = tuple(
        _parse_detection(entry, line_no,
                         int(width) if width is not None else None,
                         int(height) if height is not None else None)
        for entry in raw_detections
    )
    try:
        return ImageRecord(
            image_id=image_id,
            prompt_id=prompt_id,
            sample_index=sample_index,
            detections=detections,
            image_uri=str(uri) if uri is not None else None,
        )
    except CorpusIntegrityError as exc:
        raise MalformedLine(line_no, str(exc)) from exc


def parse_records(stream: Iterable[str], *, lenient: bool = False) -> IngestResult:
    """Parse a record stream into an indexed corpus.

    Strict mode (default) raises on the first invalid line, with its
    1-based line number. Lenient mode skips invalid lines and reports them
    in IngestResult.errors; no line is ever silently dropped. Header
    problems (missing, wrong schema version) raise in both modes.
    """
    run_id: str | None = None
    metadata: RunMetadata | None = None
    prompts: dict[str, tuple[int, PromptRecord]] = {}
    images: dict[str, tuple[int, ImageRecord]] = {}
    samples: dict[tuple[str, int], int] = {}
    errors: list[LineError] = []
    body_lines = 0

    def fail(err: LineError) -> None:
        if lenient:
            errors.append(err)
        else:
            raise err

    for line_no, line in enumerate(stream, start=1):
        text = line.strip()
        if not text:
            continue
        if run_id is None:
            run_id, metadata = _parse_header(text)
            continue
        body_lines += 1
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            fail(MalformedLine(line_no, f"not valid JSON: {exc}"))
            continue
        if not isinstance(doc, dict):
            fail(MalformedLine(line_no, "line is not a JSON object"))
            continue
        kind = doc.get("kind")
        try:
            if kind == "prompt":
                record = _parse_prompt_line(doc, line_no)
                if record.prompt_id in prompts:
                    raise DuplicatePromptId(line_no, f"prompt_id {record.prompt_id!r} already seen")
                prompts[record.prompt_id] = (line_no, record)
            elif kind == "image":
                image = _parse_image_line(doc, line_no)
                if image.image_id in images:
                    raise DuplicateImageId(line_no, f"image_id {image.image_id!r} already seen")
                key = (image.prompt_id, image.sample_index)
                if key in samples:
                    raise DuplicateSampleIndex(line_no, f"sample {key} already seen")
                samples[key] = line_no
                images[image.image_id] = (line_no, image)
            else:
                raise MalformedLine(line_no, f"unknown kind {kind!r}")
        except LineError as err:
            fail(err)
            continue

    if run_id is None or metadata is None:
        raise MissingHeader("stream contains no header line")

    # Referential integrity can only be settled once all lines are read:
    # prompt lines may legally follow the images that reference them.
    dangling = [
        (line_no, image) for line_no, image in images.values()
        if image.prompt_id not in prompts
    ]
    for line_no, image in sorted(dangling, key=lambda pair: pair[0]):
        fail(UnknownPromptId(line_no, f"image {image.image_id!r} references unknown prompt {image.prompt_id!r}"))
        del images[image.image_id]

    corpus = build_corpus(
        run_id=run_id,
        prompts=[record for _, record in prompts.values()],
        images=[image for _, image in images.values()],
        metadata=metadata,
    )
    return IngestResult(
        corpus=corpus,
        errors=errors,
        body_lines=body_lines,
        records=len(prompts) + len(images),
    )


# --- persistence -------------------------------------------------------------

def _canon(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def corpus_lines(corpus: AuditCorpus) -> list[str]:
    """Serialize a corpus as record-file lines in canonical order."""
    meta = corpus.metadata
    header = {
        "schema_version": SCHEMA_VERSION,
        "run_id": corpus.run_id,
        "generator_id": meta.generator_id,
        "detector_id": meta.detector_id,
        "K_nominal": meta.K_nominal,
    }
    if meta.created_at:
        header["created_at"] = meta.created_at
    if meta.config_digest:
        header["config_digest"] = meta.config_digest
    lines = [_canon(header)]
    for prompt_id in sorted(corpus.prompts):
        p = corpus.prompts[prompt_id]
        lines.append(_canon({
            "kind": "prompt",
            "prompt_id": p.prompt_id,
            "text": p.text,
            "weight": p.weight,
            "provenance": p.provenance,
        }))
    for image_id in sorted(corpus.images):
        img = corpus.images[image_id]
        doc = {
            "kind": "image",
            "image_id": img.image_id,
            "prompt_id": img.prompt_id,
            "sample_index": img.sample_index,
            "detections": [
                {"label": d.label, "box": d.box.as_list(), "score": d.score}
                for d in img.detections
            ],
        }
        if img.image_uri is not None:
            doc["image_uri"] = img.image_uri
        lines.append(_canon(doc))
    return lines


def write_corpus(corpus: AuditCorpus, destination: str | Path) -> None:
    """Persist atomically (temp file + rename in the destination directory)."""
    destination = Path(destination)
    payload = "\n".join(corpus_lines(corpus)) + "\n"
    try:
        fd, tmp = tempfile.mkstemp(dir=destination.parent or Path("."),
                                   prefix=destination.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, destination)
    except OSError as exc:
        raise IoFailure(f"cannot write corpus to {destination}: {exc}") from exc


def load_corpus(path: str | Path) -> AuditCorpus:
    """Read a persisted corpus; strict parse, schema version enforced."""
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_records(fh).corpus
    except OSError as exc:
        raise IoFailure(f"cannot read corpus from {path}: {exc}") from exc


def merge_corpora(parts: list[AuditCorpus]) -> AuditCorpus:
    """Merge shards of one run (e.g. parallel bridge outputs).

    All shards must agree on run_id and metadata. Identical prompt records
    may repeat across shards (each shard can carry the full manifest);
    conflicting records for one prompt_id, or any repeated image, fail.
    """
    if not parts:
        raise CorpusIntegrityError("nothing to merge")
    first = parts[0]
    prompts: dict[str, PromptRecord] = {}
    images: list[ImageRecord] = []
    for part in parts:
        if part.run_id != first.run_id or part.metadata != first.metadata:
            raise CorpusIntegrityError(
                f"shard for run {part.run_id!r} does not match run {first.run_id!r} metadata"
            )
        for prompt_id, record in part.prompts.items():
            known = prompts.get(prompt_id)
            if known is None:
                prompts[prompt_id] = record
            elif known != record:
                raise CorpusIntegrityError(
                    f"conflicting prompt records for {prompt_id!r} across shards"
                )
        images.extend(part.images.values())
    return build_corpus(first.run_id, list(prompts.values()), images, first.metadata)


# --- alias folding -----------------------------------------------------------

def apply_alias_map(corpus: AuditCorpus, aliases: dict[str, str]) -> AuditCorpus:
    """Rewrite detector labels through a one-step alias map.

    The map must be flat: an alias target may not itself be aliased
    (chains like {a: b, b: c} are rejected). Returns a new corpus with
    labels rewritten and presence sets re-deduplicated; the input corpus
    is untouched.
    """
    normalized = {
        normalize_label(src): normalize_label(dst) for src, dst in aliases.items()
    }
    for src, dst in normalized.items():
        if dst in normalized:
            raise AliasCycle(f"alias chain: {src!r} -> {dst!r} -> {normalized[dst]!r}")
    if not normalized:
        return corpus

    new_images = []
    for image_id in sorted(corpus.images):
        img = corpus.images[image_id]
        detections = tuple(
            Detection(label=normalized.get(d.label, d.label), box=d.box, score=d.score)
            for d in img.detections
        )
        new_images.append(ImageRecord(
            image_id=img.image_id,
            prompt_id=img.prompt_id,
            sample_index=img.sample_index,
            detections=detections,
            image_uri=img.image_uri,
            detector_id=img.detector_id,
        ))
    return build_corpus(
        run_id=corpus.run_id,
        prompts=list(corpus.prompts.values()),
        images=new_images,
        metadata=corpus.metadata,
    )


def load_alias_file(path: str | Path) -> dict[str, str]:
    """Alias file: a YAML/JSON mapping of label -> replacement label."""
    import yaml

    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read alias map {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise IoFailure(f"alias map {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise IoFailure(f"alias map {path} must be a mapping")
    return {str(k): str(v) for k, v in doc.items()}
