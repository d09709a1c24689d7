"""Distributional summaries of a corpus: frequency, stability, intervals.

The marginal frequency of a concept is the share of images containing it;
the conditional frequency is that share within one prompt's images. The
stability of a concept is the coefficient of variation of its conditional
frequencies across prompts: low CV means the concept shows up regardless
of the prompt, high CV means specific prompts trigger it.

Prompt weights (from weighted empirical distributions) scale each image's
contribution to marginal quantities by its prompt's weight; with unit
weights every formula reduces exactly to plain counting over images.
Conditionals are weight-free since a prompt's weight cancels within its
own images.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import AuditCorpus, normalize_label, presence_set
from .errors import (
    EmptyCorpus,
    EmptyPrompt,
    NotEnoughImages,
    UnknownPrompt,
    ValidationError,
)

DEFAULT_TAU = 0.05
DEFAULT_CV_CUTOFF = 1.0
DEFAULT_CI_GROUPS = 10

PERSISTENT = "persistent"
TRIGGERED = "triggered"

THREADS_ENV = "CONCEPT_AUDIT_THREADS"


def default_group_size(total_images: int) -> int:
    return min(1000, total_images // 2)


def worker_count() -> int:
    """Worker cap from the environment; counting is serial by default."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def prompt_presence_counts(corpus: AuditCorpus) -> dict[str, Counter]:
    """Per prompt, how many of its images contain each concept.

    Counting parallelizes over image partitions when CONCEPT_AUDIT_THREADS
    allows; counts merge additively, so the partitioning never changes the
    result.
    """
    image_ids = sorted(corpus.images)

    def count_chunk(chunk: list[str]) -> dict[str, Counter]:
        out: dict[str, Counter] = {}
        for image_id in chunk:
            img = corpus.images[image_id]
            counter = out.setdefault(img.prompt_id, Counter())
            for label in presence_set(img):
                counter[label] += 1
        return out

    workers = worker_count()
    if workers == 1 or len(image_ids) < 2 * workers:
        partials = [count_chunk(image_ids)]
    else:
        step = math.ceil(len(image_ids) / workers)
        chunks = [image_ids[i:i + step] for i in range(0, len(image_ids), step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(count_chunk, chunks))

    merged: dict[str, Counter] = {pid: Counter() for pid in corpus.prompts}
    for partial in partials:
        for pid, counter in partial.items():
            merged[pid].update(counter)
    return merged


@dataclass(frozen=True)
class FrequencyRow:
    label: str
    count: int  # raw image count containing the concept
    p: float    # weight-aware share; equals count/total_images at unit weights


@dataclass(frozen=True)
class FrequencyTable:
    total_images: int
    rows: dict[str, FrequencyRow]

    def p(self, label: str) -> float:
        row = self.rows.get(label)
        return row.p if row else 0.0

    def top(self, m: int) -> list[FrequencyRow]:
        """Highest-frequency rows; ties resolved lexicographically."""
        ordered = sorted(self.rows.values(), key=lambda r: (-r.p, r.label))
        return ordered[:m]


@dataclass(frozen=True)
class ConditionalSlice:
    prompt_id: str
    image_count: int
    rows: dict[str, float]  # concept -> share of this prompt's images


@dataclass(frozen=True)
class StabilityRow:
    label: str
    p: float
    sigma: float
    cv: float
    classification: str


@dataclass(frozen=True)
class StabilityTable:
    tau: float
    cv_cutoff: float
    prompt_count: int
    rows: dict[str, StabilityRow]


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    lo: float
    hi: float
    method: str
    groups: int
    group_size: int
    seed: int


def _weights_and_denominator(corpus: AuditCorpus) -> tuple[dict[str, float], float]:
    weights = {pid: corpus.prompts[pid].weight for pid in corpus.prompts}
    denom = sum(
        weights[pid] * len(corpus.images_by_prompt[pid])
        for pid in sorted(corpus.prompts)
    )
    return weights, denom


def concept_frequency(corpus: AuditCorpus) -> FrequencyTable:
    """Share of images containing each concept, over the whole corpus.

    The denominator is the actual image count (prompts may have unequal
    image counts), weight-scaled when prompt weights are not all 1.
    """
    if not corpus.images:
        raise EmptyCorpus("corpus has no images")
    counts = prompt_presence_counts(corpus)
    weights, denom = _weights_and_denominator(corpus)
    if denom <= 0:
        raise EmptyCorpus("every image belongs to a zero-weight prompt")

    # Accumulate per label in sorted prompt order so float sums are
    # reproducible regardless of hash seeds or partitioning.
    raw: dict[str, int] = {}
    weighted: dict[str, float] = {}
    for pid in sorted(corpus.prompts):
        w = weights[pid]
        for label in sorted(counts[pid]):
            n = counts[pid][label]
            raw[label] = raw.get(label, 0) + n
            weighted[label] = weighted.get(label, 0.0) + w * n
    rows = {
        label: FrequencyRow(label=label, count=raw[label], p=weighted[label] / denom)
        for label in sorted(raw)
    }
    return FrequencyTable(total_images=len(corpus.images), rows=rows)


def conditional_frequency(corpus: AuditCorpus, prompt_id: str) -> ConditionalSlice:
    """Per-concept share within one prompt's images."""
    if prompt_id not in corpus.prompts:
        raise UnknownPrompt(f"prompt {prompt_id!r} not in corpus")
    image_ids = corpus.images_by_prompt[prompt_id]
    if not image_ids:
        raise EmptyPrompt(f"prompt {prompt_id!r} has no images")
    counter: Counter = Counter()
    for image_id in image_ids:
        for label in presence_set(corpus.images[image_id]):
            counter[label] += 1
    k = len(image_ids)
    return ConditionalSlice(
        prompt_id=prompt_id,
        image_count=k,
        rows={label: counter[label] / k for label in sorted(counter)},
    )


def concept_stability(corpus: AuditCorpus,
                      tau: float = DEFAULT_TAU,
                      cv_cutoff: float = DEFAULT_CV_CUTOFF) -> StabilityTable:
    """Coefficient of variation of conditional frequencies across prompts.

    Only concepts with marginal frequency strictly above tau are reported;
    a marginal of zero is never reported even at tau == 0 (the ratio is
    undefined there). Classification: persistent when CV < cv_cutoff,
    triggered otherwise.
    """
    if not (0.0 <= tau < 1.0):
        raise ValidationError(f"tau must be in [0,1), got {tau}")
    if cv_cutoff <= 0:
        raise ValidationError(f"cv_cutoff must be > 0, got {cv_cutoff}")
    if not corpus.images:
        raise EmptyCorpus("corpus has no images")
    for pid in sorted(corpus.prompts):
        if not corpus.images_by_prompt[pid]:
            raise EmptyPrompt(f"prompt {pid!r} has no images")

    freq = concept_frequency(corpus)
    counts = prompt_presence_counts(corpus)
    prompt_ids = sorted(corpus.prompts)
    n_prompts = len(prompt_ids)
    k_by_prompt = {pid: len(corpus.images_by_prompt[pid]) for pid in prompt_ids}

    rows: dict[str, StabilityRow] = {}
    for label in sorted(corpus.presence):
        p = freq.rows[label].p
        if not (p > tau) or p == 0.0:
            continue
        variance = sum(
            (counts[pid].get(label, 0) / k_by_prompt[pid] - p) ** 2
            for pid in prompt_ids
        ) / n_prompts
        sigma = math.sqrt(variance)
        cv = sigma / p
        rows[label] = StabilityRow(
            label=label,
            p=p,
            sigma=sigma,
            cv=cv,
            classification=PERSISTENT if cv < cv_cutoff else TRIGGERED,
        )
    return StabilityTable(tau=tau, cv_cutoff=cv_cutoff,
                          prompt_count=n_prompts, rows=rows)


def subsample_ci(corpus: AuditCorpus,
                 concept: str,
                 groups: int = DEFAULT_CI_GROUPS,
                 group_size: int | None = None,
                 seed: int = 0) -> IntervalEstimate:
    """Percentile interval for a concept's frequency over random subsamples.

    Draws `groups` independent subsamples of `group_size` images (without
    replacement within a group), computes the concept's share in each, and
    reports the mean with the 2.5/97.5 percentiles (linear interpolation).
    A concept absent from the corpus yields the degenerate zero estimate.
    """
    total = len(corpus.images)
    if group_size is None:
        group_size = default_group_size(total)
    if groups < 2:
        raise ValidationError(f"groups must be >= 2, got {groups}")
    if group_size < 1:
        raise ValidationError(f"group_size must be >= 1, got {group_size}")
    if total < group_size:
        raise NotEnoughImages(
            f"corpus has {total} images, need >= group_size ({group_size})"
        )
    label = normalize_label(concept)
    image_ids = sorted(corpus.images)
    containing = corpus.presence.get(label, frozenset())
    if not containing:
        return IntervalEstimate(0.0, 0.0, 0.0, "subsample_percentile",
                                groups, group_size, seed)

    member = np.array([image_id in containing for image_id in image_ids], dtype=float)
    rng = np.random.default_rng(seed)
    estimates = np.array([
        member[rng.choice(total, size=group_size, replace=False)].mean()
        for _ in range(groups)
    ])
    lo, hi = np.percentile(estimates, [2.5, 97.5])
    return IntervalEstimate(
        point=float(estimates.mean()),
        lo=float(lo),
        hi=float(hi),
        method="subsample_percentile",
        groups=groups,
        group_size=group_size,
        seed=seed,
    )
