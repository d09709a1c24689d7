"""Pairwise concept associations and the concept -> prompt reverse index.

A transaction is one image's presence set. Support of a pair is the share
of images containing both concepts, confidence(c -> c') is support divided
by the share of c, and lift is support divided by the product of both
shares (lift > 1 means positive association). Pairs are enumerated per
image over its presence set, so cost scales with per-image set sizes, not
with the vocabulary squared; the exhaustive zero-support pairs appear only
when min_support == 0 asks for them.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass

from .core import AuditCorpus, BoundingBox, fold_text, normalize_label, presence_set
from .errors import EmptyCorpus, UnknownConcept, ValidationError
from .metrics import _weights_and_denominator, concept_frequency

METRIC_SUPPORT = "support"
METRIC_CONFIDENCE = "confidence"
METRIC_LIFT = "lift"
RANK_METRICS = (METRIC_SUPPORT, METRIC_CONFIDENCE, METRIC_LIFT)

DEFAULT_EVIDENCE_CAP = 50


@dataclass(frozen=True)
class CoocRow:
    """One unordered concept pair; a < b lexicographically."""

    a: str
    b: str
    joint_count: int
    support: float
    confidence_a_to_b: float
    confidence_b_to_a: float
    lift: float


@dataclass(frozen=True)
class CoocTable:
    min_support: float
    total_images: int
    rows: dict[tuple[str, str], CoocRow]


@dataclass(frozen=True)
class PartnerRow:
    """A co-occurrence partner of one anchor concept."""

    partner: str
    joint_count: int
    support: float
    confidence: float      # anchor -> partner
    confidence_rev: float  # partner -> anchor
    lift: float


@dataclass(frozen=True)
class EvidenceItem:
    image_id: str
    image_uri: str | None
    boxes: tuple[BoundingBox, ...]
    scores: tuple[float, ...]


@dataclass(frozen=True)
class ReverseIndexEntry:
    concept: str
    prompt_hits: tuple[tuple[str, int], ...]  # (prompt_id, image_count), count desc
    evidence: tuple[EvidenceItem, ...]


@dataclass(frozen=True)
class WatchlistHit:
    prompt_id: str
    image_count: int
    explicit: bool  # concept text occurs verbatim (whole-word) in the prompt


@dataclass(frozen=True)
class WatchlistFinding:
    label: str
    count: int
    p: float
    hits: tuple[WatchlistHit, ...]


def _pair_counts_by_prompt(corpus: AuditCorpus) -> dict[str, Counter]:
    """Per prompt, joint image counts for every co-occurring pair."""
    out: dict[str, Counter] = {pid: Counter() for pid in corpus.prompts}
    for image_id in sorted(corpus.images):
        img = corpus.images[image_id]
        labels = sorted(presence_set(img))
        counter = out[img.prompt_id]
        for pair in itertools.combinations(labels, 2):
            counter[pair] += 1
    return out


def cooccurrence(corpus: AuditCorpus, min_support: float = 0.0) -> CoocTable:
    """All unordered pairs whose support reaches min_support.

    At min_support == 0 this includes every vocabulary pair, zero-support
    ones with all metrics at 0 (the table is then quadratic in vocabulary
    size). Raising min_support only ever filters this result.
    """
    if not (0.0 <= min_support <= 1.0):
        raise ValidationError(f"min_support must be in [0,1], got {min_support}")
    if not corpus.images:
        raise EmptyCorpus("corpus has no images")

    freq = concept_frequency(corpus)
    pair_counts = _pair_counts_by_prompt(corpus)
    weights, denom = _weights_and_denominator(corpus)

    raw_joint: dict[tuple[str, str], int] = {}
    weighted_joint: dict[tuple[str, str], float] = {}
    for pid in sorted(corpus.prompts):
        w = weights[pid]
        for pair in sorted(pair_counts[pid]):
            n = pair_counts[pid][pair]
            raw_joint[pair] = raw_joint.get(pair, 0) + n
            weighted_joint[pair] = weighted_joint.get(pair, 0.0) + w * n

    rows: dict[tuple[str, str], CoocRow] = {}

    def add_row(pair: tuple[str, str], joint: int, support: float) -> None:
        a, b = pair
        p_a, p_b = freq.rows[a].p, freq.rows[b].p
        rows[pair] = CoocRow(
            a=a, b=b, joint_count=joint, support=support,
            confidence_a_to_b=support / p_a if p_a > 0 else 0.0,
            confidence_b_to_a=support / p_b if p_b > 0 else 0.0,
            lift=support / (p_a * p_b) if p_a > 0 and p_b > 0 else 0.0,
        )

    for pair in sorted(raw_joint):
        support = weighted_joint[pair] / denom
        if support >= min_support:
            add_row(pair, raw_joint[pair], support)
    if min_support <= 0.0:
        for pair in itertools.combinations(sorted(corpus.presence), 2):
            if pair not in rows:
                add_row(pair, 0, 0.0)
    return CoocTable(min_support=min_support, total_images=len(corpus.images),
                     rows=rows)


def top_cooccurring(corpus: AuditCorpus, concept: str, k: int,
                    metric: str = METRIC_SUPPORT,
                    min_support: float = 0.0) -> list[PartnerRow]:
    """Top-k co-occurrence partners of one concept by the chosen metric.

    Only partners that actually co-occur are candidates. Ties break by
    higher joint count, then lexicographic label, so rankings are stable.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if metric not in RANK_METRICS:
        raise ValidationError(f"metric must be one of {RANK_METRICS}, got {metric!r}")
    label = normalize_label(concept)
    if label not in corpus.presence:
        raise UnknownConcept(f"concept {label!r} not in corpus")

    freq = concept_frequency(corpus)
    weights, denom = _weights_and_denominator(corpus)

    # Joint counts restricted to images containing the anchor concept.
    joint_by_prompt: dict[str, Counter] = {pid: Counter() for pid in corpus.prompts}
    for image_id in sorted(corpus.presence[label]):
        img = corpus.images[image_id]
        for other in presence_set(img):
            if other != label:
                joint_by_prompt[img.prompt_id][other] += 1
    raw_joint: dict[str, int] = {}
    weighted_joint: dict[str, float] = {}
    for pid in sorted(corpus.prompts):
        w = weights[pid]
        for other in sorted(joint_by_prompt[pid]):
            n = joint_by_prompt[pid][other]
            raw_joint[other] = raw_joint.get(other, 0) + n
            weighted_joint[other] = weighted_joint.get(other, 0.0) + w * n

    p_anchor = freq.rows[label].p
    partners: list[PartnerRow] = []
    for other in sorted(raw_joint):
        support = weighted_joint[other] / denom
        if support < min_support:
            continue
        p_other = freq.rows[other].p
        partners.append(PartnerRow(
            partner=other,
            joint_count=raw_joint[other],
            support=support,
            confidence=support / p_anchor if p_anchor > 0 else 0.0,
            confidence_rev=support / p_other if p_other > 0 else 0.0,
            lift=support / (p_anchor * p_other) if p_anchor > 0 and p_other > 0 else 0.0,
        ))

    def sort_key(row: PartnerRow):
        value = {
            METRIC_SUPPORT: row.support,
            METRIC_CONFIDENCE: row.confidence,
            METRIC_LIFT: row.lift,
        }[metric]
        return (-value, -row.joint_count, row.partner)

    return sorted(partners, key=sort_key)[:k]


def reverse_index(corpus: AuditCorpus, concept: str,
                  evidence_cap: int = DEFAULT_EVIDENCE_CAP) -> ReverseIndexEntry:
    """Prompts that produced a concept, plus localized evidence images.

    Evidence selection is deterministic: lowest image_id first, capped.
    """
    label = normalize_label(concept)
    containing = corpus.presence.get(label)
    if not containing:
        raise UnknownConcept(f"concept {label!r} not in corpus")

    per_prompt: Counter = Counter()
    for image_id in containing:
        per_prompt[corpus.images[image_id].prompt_id] += 1
    prompt_hits = tuple(sorted(
        per_prompt.items(), key=lambda item: (-item[1], item[0])
    ))

    evidence = []
    for image_id in sorted(containing)[:max(0, evidence_cap)]:
        img = corpus.images[image_id]
        matching = [d for d in img.detections if d.label == label]
        evidence.append(EvidenceItem(
            image_id=image_id,
            image_uri=img.image_uri,
            boxes=tuple(d.box for d in matching),
            scores=tuple(d.score for d in matching),
        ))
    return ReverseIndexEntry(concept=label, prompt_hits=prompt_hits,
                             evidence=tuple(evidence))


def _contains_whole_word(text: str, phrase: str) -> bool:
    return re.search(rf"(?<!\w){re.escape(phrase)}(?!\w)", text) is not None


def watchlist_scan(corpus: AuditCorpus, watchlist: set[str] | list[str]) -> list[WatchlistFinding]:
    """Scan detected concepts (not prompt text) for watchlisted labels.

    Each prompt hit is flagged explicit when the label occurs whole-word in
    the prompt's folded text, implicit otherwise; implicit hits are the
    interesting ones, since nothing in the prompt asked for the concept.
    Absent labels are reported at zero frequency so a scan never hides a
    watchlist entry.
    """
    if not corpus.images:
        raise EmptyCorpus("corpus has no images")
    freq = concept_frequency(corpus)
    findings: list[WatchlistFinding] = []
    for raw_label in sorted({normalize_label(w) for w in watchlist}):
        row = freq.rows.get(raw_label)
        if row is None:
            findings.append(WatchlistFinding(label=raw_label, count=0, p=0.0, hits=()))
            continue
        entry = reverse_index(corpus, raw_label, evidence_cap=0)
        hits = tuple(
            WatchlistHit(
                prompt_id=pid,
                image_count=n,
                explicit=_contains_whole_word(fold_text(corpus.prompts[pid].text), raw_label),
            )
            for pid, n in entry.prompt_hits
        )
        findings.append(WatchlistFinding(label=raw_label, count=row.count,
                                         p=row.p, hits=hits))
    return findings
