"""Declarative prompt distributions: bracket templates and empirical lists.

A distribution is either ``cartesian_uniform`` (templates with value sets,
expanded to the full grid at weight 1) or ``weighted_empirical`` (an explicit
prompt list with nonnegative weights). Placeholders use bracket notation:
``"A photo of a [age] person [action]"``; a literal ``[`` is written ``[[``.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .core import PROVENANCE_EMPIRICAL, PROVENANCE_TEMPLATE, PromptRecord
from .errors import (
    EmptyPlaceholderName,
    EmptyValueSet,
    InvalidPlaceholderName,
    NoPrompts,
    UnclosedPlaceholder,
    ValidationError,
)

MODE_CARTESIAN = "cartesian_uniform"
MODE_EMPIRICAL = "weighted_empirical"

_NAME_RE = re.compile(r"[a-z0-9_]+\Z")

# RNG recorded in run metadata so draws can be replayed elsewhere.
SAMPLER_ALGORITHM = "numpy-pcg64"


@dataclass(frozen=True)
class Segment:
    """One template piece: literal text or a placeholder reference."""

    text: str
    is_placeholder: bool = False


@dataclass(frozen=True)
class PromptTemplate:
    raw: str
    segments: tuple[Segment, ...]
    placeholder_names: tuple[str, ...]  # ordered, first occurrence, unique

    def render(self, binding: dict[str, str]) -> str:
        """Substitute every placeholder; a repeated name binds to one value."""
        parts = []
        for seg in self.segments:
            if seg.is_placeholder:
                if seg.text not in binding:
                    raise ValidationError(f"no value bound for placeholder [{seg.text}]")
                parts.append(binding[seg.text])
            else:
                parts.append(seg.text)
        return "".join(parts)


def parse_template(raw: str) -> PromptTemplate:
    """Parse bracket notation into literal and placeholder segments.

    ``[[`` is an escaped literal ``[``; a bare ``]`` is literal. Rendering
    the segments with the identity binding reproduces ``raw`` with escapes
    resolved.
    """
    segments: list[Segment] = []
    names: list[str] = []
    literal: list[str] = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch != "[":
            literal.append(ch)
            i += 1
            continue
        if i + 1 < n and raw[i + 1] == "[":
            literal.append("[")
            i += 2
            continue
        end = raw.find("]", i + 1)
        if end == -1:
            raise UnclosedPlaceholder(f"unclosed placeholder at offset {i} in {raw!r}")
        name = raw[i + 1:end]
        if not name:
            raise EmptyPlaceholderName(f"empty placeholder name at offset {i} in {raw!r}")
        if not _NAME_RE.match(name):
            raise InvalidPlaceholderName(
                f"placeholder name {name!r} must match [a-z0-9_]+"
            )
        if literal:
            segments.append(Segment("".join(literal)))
            literal = []
        segments.append(Segment(name, is_placeholder=True))
        if name not in names:
            names.append(name)
        i = end + 1
    if literal:
        segments.append(Segment("".join(literal)))
    return PromptTemplate(raw=raw, segments=tuple(segments),
                          placeholder_names=tuple(names))


@dataclass(frozen=True)
class PromptDistributionSpec:
    """Parsed prompt-spec document."""

    mode: str
    templates: tuple[tuple[PromptTemplate, dict[str, tuple[str, ...]]], ...] = ()
    empirical_prompts: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.mode not in (MODE_CARTESIAN, MODE_EMPIRICAL):
            raise ValidationError(
                f"mode must be {MODE_CARTESIAN!r} or {MODE_EMPIRICAL!r}, got {self.mode!r}"
            )
        if self.mode == MODE_CARTESIAN:
            if not self.templates:
                raise NoPrompts("cartesian_uniform spec has no templates")
            for template, values in self.templates:
                for name in template.placeholder_names:
                    if not values.get(name):
                        raise EmptyValueSet(
                            f"placeholder [{name}] of template {template.raw!r} "
                            "has no values"
                        )
        else:
            if not self.empirical_prompts:
                raise NoPrompts("weighted_empirical spec has no prompts")
            weights = [w for _, w in self.empirical_prompts]
            if any(w < 0 for w in weights):
                raise ValidationError("empirical weights must be >= 0")
            if sum(weights) == 0:
                raise ValidationError("empirical weights must not all be zero")


def _digest_id(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return "p" + hashlib.sha256(blob).hexdigest()[:16]


def expand_distribution(spec: PromptDistributionSpec) -> list[PromptRecord]:
    """Materialize the distribution as PromptRecords in deterministic order.

    Cartesian mode yields one record per grid cell per template (template
    order, then value-list order, last placeholder fastest), each at weight
    1. Empirical mode yields one record per listed prompt. prompt_ids are
    content digests over (template index, binding) or (list index, text),
    so they are stable across runs and never collide.
    """
    records: list[PromptRecord] = []
    if spec.mode == MODE_CARTESIAN:
        for t_idx, (template, values) in enumerate(spec.templates):
            names = template.placeholder_names
            pools = [values[name] for name in names]
            for combo in itertools.product(*pools):
                binding = dict(zip(names, combo))
                records.append(PromptRecord(
                    prompt_id=_digest_id({"t": t_idx, "binding": binding}),
                    text=template.render(binding),
                    weight=1.0,
                    provenance=PROVENANCE_TEMPLATE,
                ))
    else:
        for idx, (text, weight) in enumerate(spec.empirical_prompts):
            records.append(PromptRecord(
                prompt_id=_digest_id({"i": idx, "text": text}),
                text=text,
                weight=float(weight),
                provenance=PROVENANCE_EMPIRICAL,
            ))
    if not records:
        raise NoPrompts("distribution expands to no prompts")
    return records


def sample_prompts(spec: PromptDistributionSpec, n: int, seed: int) -> list[PromptRecord]:
    """Draw n prompts with replacement, proportional to weight.

    Uniform over the expansion in cartesian mode. Deterministic for a fixed
    seed (PCG64 stream).
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    expansion = expand_distribution(spec)
    weights = np.array([p.weight for p in expansion], dtype=float)
    total = weights.sum()
    if total <= 0:
        raise NoPrompts("all prompt weights are zero")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(expansion), size=n, replace=True, p=weights / total)
    return [expansion[i] for i in idx]


# --- prompt-spec document ----------------------------------------------------
#
# One YAML/JSON document:
#   mode: cartesian_uniform | weighted_empirical
#   templates: [{template: "...", values: {name: [..]}}]
#   empirical: [{text: "...", weight: 1.0}]

def parse_spec_document(doc: dict) -> PromptDistributionSpec:
    if not isinstance(doc, dict):
        raise ValidationError("prompt spec must be a mapping")
    mode = doc.get("mode")
    if mode not in (MODE_CARTESIAN, MODE_EMPIRICAL):
        raise ValidationError(
            f"prompt spec 'mode' must be {MODE_CARTESIAN!r} or {MODE_EMPIRICAL!r}"
        )
    templates = []
    for entry in doc.get("templates") or []:
        if not isinstance(entry, dict) or "template" not in entry:
            raise ValidationError("each templates entry needs a 'template' field")
        template = parse_template(str(entry["template"]))
        raw_values = entry.get("values") or {}
        if not isinstance(raw_values, dict):
            raise ValidationError("'values' must map placeholder names to lists")
        values = {
            str(name): tuple(str(v) for v in vals)
            for name, vals in raw_values.items()
        }
        templates.append((template, values))
    empirical = []
    for entry in doc.get("empirical") or []:
        if not isinstance(entry, dict) or "text" not in entry:
            raise ValidationError("each empirical entry needs a 'text' field")
        empirical.append((str(entry["text"]), float(entry.get("weight", 1.0))))
    return PromptDistributionSpec(
        mode=mode,
        templates=tuple(templates),
        empirical_prompts=tuple(empirical),
    )


def load_spec(path: str | Path) -> PromptDistributionSpec:
    """Load a prompt-spec file (YAML; JSON parses as a YAML subset)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read prompt spec {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"prompt spec {path} is not valid YAML/JSON: {exc}") from exc
    return parse_spec_document(doc)
