"""Bridge configuration: which backend, which detector, how many images."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

MODE_CAPTION_GROUNDING = "caption_grounding"
MODE_DENSE_REGION = "dense_region"
MODE_VQA_LABEL = "vqa_label"
DETECTOR_MODES = (MODE_CAPTION_GROUNDING, MODE_DENSE_REGION, MODE_VQA_LABEL)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BridgeConfig:
    generator_id: str = "shapes"
    detector_id: str = "shape-color"
    detector_mode: str = MODE_CAPTION_GROUNDING
    k: int = 1                      # images per prompt
    steps: int = 4
    guidance_scale: float = 0.0
    image_size: int = 256
    seed: int = 0
    run_id: str = ""                # derived from the config digest when empty
    vqa_question: str = "what is the dominant concept?"
    negative_text: str = ""         # comma-joined labels to attenuate
    positive_suffix: str = ""       # comma-joined labels to amplify
    tie_break_seed: int = 0         # recorded for dataset-replay provenance
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.detector_mode not in DETECTOR_MODES:
            raise ConfigError(
                f"detector_mode must be one of {DETECTOR_MODES}, got {self.detector_mode!r}"
            )
        if self.image_size < 16:
            raise ConfigError("image_size must be >= 16")

    def digest(self) -> str:
        payload = {
            "generator_id": self.generator_id,
            "detector_id": self.detector_id,
            "detector_mode": self.detector_mode,
            "k": self.k,
            "steps": self.steps,
            "guidance_scale": self.guidance_scale,
            "image_size": self.image_size,
            "seed": self.seed,
            "vqa_question": self.vqa_question,
            "negative_text": self.negative_text,
            "positive_suffix": self.positive_suffix,
            "tie_break_seed": self.tie_break_seed,
            "sampler": "numpy-pcg64",
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def effective_run_id(self) -> str:
        return self.run_id or f"bridge-{self.digest()[:8]}"


_FIELDS = {
    "generator_id", "detector_id", "detector_mode", "k", "steps",
    "guidance_scale", "image_size", "seed", "run_id", "vqa_question",
    "negative_text", "positive_suffix", "tie_break_seed",
}


def load_config(path: str | Path) -> BridgeConfig:
    """Read a YAML/JSON config file; unknown keys land in `extra`."""
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    known = {key: doc[key] for key in doc if key in _FIELDS}
    extra = {key: doc[key] for key in doc if key not in _FIELDS}
    return BridgeConfig(**known, extra=extra)
