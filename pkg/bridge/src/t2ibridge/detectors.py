"""Detectors: pixel segmentation built in, real models via the registry.

A detector maps an image to labeled boxes: a list of {label, box, score}
dicts, boxes in pixels (caption_grounding / dense_region modes) or a single
normalized full-image box whose label answers `vqa_question` (vqa_label
mode). Grounding checkpoints (Florence-style caption+grounding, VQA
labelers) plug in through `register_detector` without touching the bridge:

    from t2ibridge.detectors import register_detector
    register_detector("my-grounder", lambda config: MyGrounder(config))

and set `detector_id: my-grounder` in the bridge config.
"""

from __future__ import annotations

from typing import Callable

from PIL import Image

from . import scene
from .config import MODE_VQA_LABEL, BridgeConfig


class DetectorUnavailable(RuntimeError):
    pass


class DetectionFailure(RuntimeError):
    pass


class ShapeColorDetector:
    """Color-segmentation detector for the procedural backend's palette."""

    def __init__(self, config: BridgeConfig):
        self.config = config

    def detect(self, img: Image.Image) -> list[dict]:
        if self.config.detector_mode == MODE_VQA_LABEL:
            return [{
                "label": scene.dominant_label(img),
                "box": [0.0, 0.0, 1.0, 1.0],
                "score": 1.0,
            }]
        return scene.segment_objects(img)

    @property
    def emits_pixel_boxes(self) -> bool:
        return self.config.detector_mode != MODE_VQA_LABEL


_FACTORIES: dict[str, Callable[[BridgeConfig], object]] = {
    "shape-color": ShapeColorDetector,
}


def register_detector(detector_id: str,
                      factory: Callable[[BridgeConfig], object]) -> None:
    """Make `detector_id` resolvable from bridge configs."""
    _FACTORIES[detector_id] = factory


def get_detector(config: BridgeConfig):
    factory = _FACTORIES.get(config.detector_id)
    if factory is None:
        raise DetectorUnavailable(
            f"unknown detector_id {config.detector_id!r}; built in: "
            f"{sorted(_FACTORIES)} (register others via register_detector)"
        )
    return factory(config)
