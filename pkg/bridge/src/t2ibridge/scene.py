"""Deterministic procedural scenes: the built-in toy generation backend.

Prompt words map to objects with hand-picked conditional quirks (so audits
of the toy world surface real associations, e.g. "disability" overwhelmingly
produces a wheelchair unless attenuated). Each object is drawn as a solid,
uniquely colored shape on a white canvas; the paired detector recovers
objects from pixels by color segmentation, so the generate -> detect loop
is a genuine, if tiny, vision pipeline.
"""

from __future__ import annotations

import hashlib

import numpy as np
from PIL import Image, ImageDraw

BACKGROUND = (255, 255, 255)

# label -> (fill color, shape kind). Colors are exact and unique; the
# detector segments on equality, so nothing here may be anti-aliased.
PALETTE: dict[str, tuple[tuple[int, int, int], str]] = {
    "person": ((40, 70, 180), "rect"),
    "man": ((20, 120, 60), "rect"),
    "woman": ((170, 40, 130), "rect"),
    "face": ((230, 190, 140), "ellipse"),
    "dog": ((120, 80, 30), "ellipse"),
    "shoes": ((40, 40, 40), "rect"),
    "wheelchair": ((90, 90, 200), "ellipse"),
    "hospital": ((200, 60, 60), "rect"),
    "bed": ((140, 140, 220), "rect"),
    "shorts": ((250, 160, 30), "rect"),
    "stick": ((150, 110, 60), "rect"),
    "tree": ((30, 140, 30), "ellipse"),
    "ball": ((240, 60, 60), "ellipse"),
    "car": ((60, 60, 160), "rect"),
    "hat": ((100, 30, 150), "ellipse"),
    "glasses": ((10, 90, 90), "rect"),
}

# word seen in the prompt -> possible objects with emission probabilities.
ASSOCIATIONS: dict[str, list[tuple[str, float]]] = {
    "person": [("person", 1.0), ("face", 0.7), ("shoes", 0.5)],
    "man": [("man", 1.0), ("face", 0.7)],
    "woman": [("woman", 1.0), ("face", 0.7)],
    "jogging": [("woman", 0.6), ("man", 0.4), ("shoes", 0.9)],
    "running": [("man", 0.8), ("woman", 0.2), ("shoes", 0.9)],
    "sprinting": [("man", 0.7), ("shoes", 0.9)],
    "disability": [("wheelchair", 0.95), ("person", 1.0)],
    "illness": [("hospital", 0.7), ("bed", 0.6)],
    "limb": [("shorts", 0.8), ("stick", 0.4)],
    "dog": [("dog", 1.0), ("ball", 0.3)],
    "park": [("tree", 0.9), ("ball", 0.4)],
    "driving": [("car", 0.95)],
    "hat": [("hat", 1.0)],
    "glasses": [("glasses", 1.0)],
    "wheelchair": [("wheelchair", 1.0)],
    "shoes": [("shoes", 1.0)],
}


def derive_seed(base_seed: int, prompt_id: str, sample_index: int) -> int:
    blob = f"{base_seed}:{prompt_id}:{sample_index}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


def _split_labels(csv_text: str) -> list[str]:
    return [part.strip().lower() for part in csv_text.split(",") if part.strip()]


def sample_scene(prompt_text: str, seed: int,
                 negative_text: str = "", positive_suffix: str = "") -> list[str]:
    """Objects for one image: prompt associations, then conditioning edits.

    Attenuated labels are removed after sampling (the analog of swapping the
    unconditional prompt for negative text); amplified labels are injected.
    """
    rng = np.random.default_rng(seed)
    words = [w.strip(".,!?()[]\"'").lower() for w in prompt_text.split()]
    labels: list[str] = []
    for word in words:
        for label, probability in ASSOCIATIONS.get(word, []):
            if label not in labels and rng.random() < probability:
                labels.append(label)
    for label in _split_labels(positive_suffix):
        if label in PALETTE and label not in labels:
            labels.append(label)
    removed = set(_split_labels(negative_text))
    return [label for label in labels if label not in removed]


def render_scene(labels: list[str], size: int, seed: int) -> Image.Image:
    """Draw each object in its own jittered grid cell (no occlusion)."""
    rng = np.random.default_rng(seed ^ 0x5CE4E)
    img = Image.new("RGB", (size, size), BACKGROUND)
    draw = ImageDraw.Draw(img)
    cells = 3
    cell = size // cells
    slots = [(r, c) for r in range(cells) for c in range(cells)]
    order = rng.permutation(len(slots))
    for i, label in enumerate(labels[:len(slots)]):
        color, kind = PALETTE[label]
        r, c = slots[order[i]]
        pad = max(2, cell // 8)
        jitter = lambda: int(rng.integers(0, max(1, pad)))
        x0 = c * cell + pad + jitter()
        y0 = r * cell + pad + jitter()
        x1 = (c + 1) * cell - pad - jitter()
        y1 = (r + 1) * cell - pad - jitter()
        if kind == "rect":
            draw.rectangle([x0, y0, x1, y1], fill=color)
        else:
            draw.ellipse([x0, y0, x1, y1], fill=color)
    return img


def segment_objects(img: Image.Image) -> list[dict]:
    """Recover objects by exact-color segmentation; pixel-space boxes.

    Returns [{label, box: [x0,y0,x1,y1] pixels, score}] where score is the
    fill ratio of the color mask within its bounding box.
    """
    array = np.asarray(img.convert("RGB"))
    detections = []
    for label, (color, _) in PALETTE.items():
        mask = np.all(array == np.array(color, dtype=array.dtype), axis=-1)
        if not mask.any():
            continue
        ys, xs = np.nonzero(mask)
        x0, x1 = int(xs.min()), int(xs.max()) + 1
        y0, y1 = int(ys.min()), int(ys.max()) + 1
        area = (x1 - x0) * (y1 - y0)
        score = round(float(mask.sum()) / area, 4) if area else 1.0
        detections.append({
            "label": label,
            "box": [float(x0), float(y0), float(x1), float(y1)],
            "score": min(1.0, score),
        })
    detections.sort(key=lambda d: d["label"])
    return detections


def dominant_label(img: Image.Image) -> str:
    """Largest object by pixel count; the toy VQA answer."""
    array = np.asarray(img.convert("RGB"))
    best_label, best_count = "unknown", 0
    for label, (color, _) in PALETTE.items():
        count = int(np.all(array == np.array(color, dtype=array.dtype), axis=-1).sum())
        if count > best_count:
            best_label, best_count = label, count
    return best_label
