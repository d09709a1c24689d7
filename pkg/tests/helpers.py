"""Shared corpus builders for the test suite."""

from __future__ import annotations

import random

from conceptaudit.core import (
    AuditCorpus,
    BoundingBox,
    Detection,
    ImageRecord,
    PromptRecord,
    RunMetadata,
    build_corpus,
)

BOX = BoundingBox(0.1, 0.1, 0.6, 0.6)


def make_image(image_id: str, prompt_id: str, sample_index: int,
               labels: list[str], uri: str | None = None) -> ImageRecord:
    return ImageRecord(
        image_id=image_id,
        prompt_id=prompt_id,
        sample_index=sample_index,
        detections=tuple(Detection(label, BOX) for label in labels),
        image_uri=uri,
    )


def make_corpus(run_id: str,
                presence_by_prompt: dict[str, list[list[str]]],
                weights: dict[str, float] | None = None,
                texts: dict[str, str] | None = None) -> AuditCorpus:
    """Corpus from {prompt_id: [presence labels per image]}."""
    weights = weights or {}
    texts = texts or {}
    prompts = [
        PromptRecord(pid, texts.get(pid, f"prompt {pid}"),
                     weight=weights.get(pid, 1.0))
        for pid in presence_by_prompt
    ]
    images = []
    for pid, image_labels in presence_by_prompt.items():
        for k, labels in enumerate(image_labels):
            images.append(make_image(f"{pid}-{k}", pid, k, labels))
    k_max = max((len(v) for v in presence_by_prompt.values()), default=1)
    return build_corpus(run_id, prompts, images,
                        RunMetadata("gen", "det", max(1, k_max)))


def random_corpus(rng: random.Random,
                  max_prompts: int = 6,
                  max_images_per_prompt: int = 20,
                  max_concepts: int = 20,
                  max_total_images: int = 100) -> AuditCorpus:
    """Random corpus with variable images-per-prompt."""
    vocab = [f"c{i:02d}" for i in range(rng.randint(1, max_concepts))]
    n_prompts = rng.randint(1, max_prompts)
    presence: dict[str, list[list[str]]] = {}
    total = 0
    for i in range(n_prompts):
        pid = f"t{i:02d}"
        k = rng.randint(1, max_images_per_prompt)
        k = min(k, max_total_images - total)
        if k <= 0:
            break
        total += k
        presence[pid] = [
            rng.sample(vocab, rng.randint(0, min(len(vocab), 6)))
            for _ in range(k)
        ]
    if not presence:
        presence = {"t00": [["c00"]]}
    return make_corpus(f"rand-{rng.randint(0, 10**9)}", presence)
