"""Record wire format: emission helpers and a pre-write self-check.

The bridge writes the workbench's line-oriented schema: one header line,
then prompt and image lines (see the workbench README for field tables).
validate_lines re-checks every line against that schema before anything
is written, so a bridge bug can never produce a file the strict ingester
would reject.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

SCHEMA_VERSION = 1


class WireError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def canon(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def header_line(run_id: str, generator_id: str, detector_id: str,
                k_nominal: int, config_digest: str = "",
                created_at: str = "") -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "run_id": run_id,
        "generator_id": generator_id,
        "detector_id": detector_id,
        "K_nominal": k_nominal,
    }
    if created_at:
        doc["created_at"] = created_at
    if config_digest:
        doc["config_digest"] = config_digest
    return canon(doc)


def prompt_line(prompt_id: str, text: str, weight: float, provenance: str) -> str:
    return canon({
        "kind": "prompt",
        "prompt_id": prompt_id,
        "text": text,
        "weight": weight,
        "provenance": provenance,
    })


def image_line(image_id: str, prompt_id: str, sample_index: int,
               detections: list[dict], image_uri: str | None = None,
               image_width: int | None = None, image_height: int | None = None,
               error: str | None = None) -> str:
    doc = {
        "kind": "image",
        "image_id": image_id,
        "prompt_id": prompt_id,
        "sample_index": sample_index,
        "detections": detections,
    }
    if image_uri is not None:
        doc["image_uri"] = image_uri
    if image_width is not None:
        doc["image_width"] = image_width
        doc["image_height"] = image_height
    if error is not None:
        doc["error"] = error
    return canon(doc)


def _check_box(box, width, height, line_no: int) -> None:
    if not (isinstance(box, list) and len(box) == 4
            and all(isinstance(v, (int, float)) for v in box)):
        raise WireError(line_no, f"box must be 4 numbers, got {box!r}")
    x0, y0, x1, y1 = box
    if width is not None:
        if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
            raise WireError(line_no, f"pixel box {box} outside {width}x{height}")
    else:
        if not (0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1):
            raise WireError(line_no, f"normalized box {box} outside [0,1]")


def validate_lines(lines: list[str]) -> None:
    """Structural self-check of an emitted record stream."""
    if not lines:
        raise WireError(0, "no lines emitted")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise WireError(1, f"header not JSON: {exc}") from exc
    for field in ("schema_version", "run_id", "generator_id", "detector_id",
                  "K_nominal"):
        if field not in header:
            raise WireError(1, f"header missing {field!r}")
    if header["schema_version"] != SCHEMA_VERSION:
        raise WireError(1, f"schema_version must be {SCHEMA_VERSION}")
    if not (isinstance(header["K_nominal"], int) and header["K_nominal"] >= 1):
        raise WireError(1, "K_nominal must be an integer >= 1")

    prompt_ids: set[str] = set()
    image_ids: set[str] = set()
    samples: set[tuple[str, int]] = set()
    referenced: dict[str, int] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise WireError(line_no, f"not JSON: {exc}") from exc
        kind = doc.get("kind")
        if kind == "prompt":
            for field in ("prompt_id", "text", "weight", "provenance"):
                if field not in doc:
                    raise WireError(line_no, f"prompt line missing {field!r}")
            if doc["provenance"] not in ("template", "empirical"):
                raise WireError(line_no, f"bad provenance {doc['provenance']!r}")
            if doc["weight"] < 0:
                raise WireError(line_no, "weight must be >= 0")
            if doc["prompt_id"] in prompt_ids:
                raise WireError(line_no, f"duplicate prompt_id {doc['prompt_id']!r}")
            prompt_ids.add(doc["prompt_id"])
        elif kind == "image":
            for field in ("image_id", "prompt_id", "sample_index", "detections"):
                if field not in doc:
                    raise WireError(line_no, f"image line missing {field!r}")
            if doc["image_id"] in image_ids:
                raise WireError(line_no, f"duplicate image_id {doc['image_id']!r}")
            image_ids.add(doc["image_id"])
            sample = (doc["prompt_id"], doc["sample_index"])
            if sample in samples:
                raise WireError(line_no, f"duplicate sample {sample}")
            samples.add(sample)
            referenced.setdefault(doc["prompt_id"], line_no)
            width = doc.get("image_width")
            height = doc.get("image_height")
            if (width is None) != (height is None):
                raise WireError(line_no, "image_width/image_height must pair")
            for det in doc["detections"]:
                if "label" not in det or not str(det["label"]).strip():
                    raise WireError(line_no, "detection without a label")
                _check_box(det.get("box"), width, height, line_no)
                score = det.get("score", 1.0)
                if not (0 <= score <= 1):
                    raise WireError(line_no, f"score {score} outside [0,1]")
        else:
            raise WireError(line_no, f"unknown kind {kind!r}")
    for prompt_id, line_no in sorted(referenced.items(), key=lambda kv: kv[1]):
        if prompt_id not in prompt_ids:
            raise WireError(line_no, f"image references unknown prompt {prompt_id!r}")


def write_records(lines: list[str], destination: str | Path) -> None:
    """Validate, then write atomically."""
    validate_lines(lines)
    destination = Path(destination)
    fd, tmp = tempfile.mkstemp(dir=destination.parent or Path("."),
                               prefix=destination.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, destination)
