"""Report assembly: audit summaries, run-vs-run diffs, prompt directives.

Reports are plain data, rendered canonically to JSON (machine) or Markdown
(human). Chart-ready series stay numeric; drawing belongs to the UI. Every
number in a report can be recomputed from the corpus with the parameters
the report itself records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .core import AuditCorpus, normalize_label
from .errors import EmptyCorpus, OverlappingSets, ValidationError
from .ingest import SCHEMA_VERSION
from .metrics import (
    DEFAULT_CI_GROUPS,
    DEFAULT_CV_CUTOFF,
    DEFAULT_TAU,
    concept_frequency,
    concept_stability,
    conditional_frequency,
    default_group_size,
    subsample_ci,
)
from .mining import METRIC_SUPPORT, RANK_METRICS, top_cooccurring, watchlist_scan

DEFAULT_TOP_M = 30
DEFAULT_PARTNER_K = 10


def canonical_json(payload) -> str:
    """Stable byte representation: sorted keys, minimal separators."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")) + "\n"


@dataclass(frozen=True)
class ReportParams:
    tau: float = DEFAULT_TAU
    cv_cutoff: float = DEFAULT_CV_CUTOFF
    top_m: int = DEFAULT_TOP_M
    k: int = DEFAULT_PARTNER_K
    metric: str = METRIC_SUPPORT
    min_support: float = 0.0
    ci_groups: int = DEFAULT_CI_GROUPS
    ci_group_size: int | None = None  # None -> min(1000, images/2)
    seed: int = 0
    watchlist: tuple[str, ...] = ()

    def __post_init__(self):
        if not (0.0 <= self.tau < 1.0):
            raise ValidationError(f"tau must be in [0,1), got {self.tau}")
        if self.cv_cutoff <= 0:
            raise ValidationError(f"cv_cutoff must be > 0, got {self.cv_cutoff}")
        if self.top_m < 1:
            raise ValidationError(f"top_m must be >= 1, got {self.top_m}")
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.metric not in RANK_METRICS:
            raise ValidationError(f"metric must be one of {RANK_METRICS}")
        if not (0.0 <= self.min_support <= 1.0):
            raise ValidationError(f"min_support must be in [0,1], got {self.min_support}")
        if self.ci_groups < 2:
            raise ValidationError(f"ci_groups must be >= 2, got {self.ci_groups}")


@dataclass(frozen=True)
class AuditReport:
    payload: dict = field(compare=False)

    def to_json(self) -> str:
        return canonical_json(self.payload)

    def to_markdown(self) -> str:
        return _render_markdown(self.payload)


def build_report(corpus: AuditCorpus, params: ReportParams | None = None) -> AuditReport:
    """Assemble the full audit summary for one corpus.

    Deterministic for fixed corpus + params + seed. Confidence intervals
    are attached to the top concepts when the corpus is large enough for
    the configured subsample shape, otherwise omitted.
    """
    params = params or ReportParams()
    if not corpus.images:
        raise EmptyCorpus("corpus has no images")

    freq = concept_frequency(corpus)
    stability = concept_stability(corpus, tau=params.tau, cv_cutoff=params.cv_cutoff)
    top_rows = freq.top(params.top_m)

    group_size = params.ci_group_size
    if group_size is None:
        group_size = default_group_size(freq.total_images)
    ci_possible = group_size >= 1 and freq.total_images >= group_size

    concepts = []
    for row in top_rows:
        entry: dict = {"label": row.label, "count": row.count, "p": row.p}
        if ci_possible:
            est = subsample_ci(corpus, row.label, groups=params.ci_groups,
                               group_size=group_size, seed=params.seed)
            entry["ci"] = {
                "point": est.point, "lo": est.lo, "hi": est.hi,
                "method": est.method, "groups": est.groups,
                "group_size": est.group_size, "seed": est.seed,
            }
        else:
            entry["ci"] = None
        concepts.append(entry)

    cooc = {}
    for row in top_rows:
        partners = top_cooccurring(corpus, row.label, k=params.k,
                                   metric=params.metric,
                                   min_support=params.min_support)
        cooc[row.label] = [
            {
                "partner": p.partner, "joint_count": p.joint_count,
                "support": p.support, "confidence": p.confidence,
                "confidence_rev": p.confidence_rev, "lift": p.lift,
            }
            for p in partners
        ]

    per_prompt = []
    for prompt_id in sorted(corpus.prompts):
        image_ids = corpus.images_by_prompt[prompt_id]
        prompt = corpus.prompts[prompt_id]
        entry = {
            "prompt_id": prompt_id,
            "text": prompt.text,
            "weight": prompt.weight,
            "image_count": len(image_ids),
        }
        if image_ids:
            cond = conditional_frequency(corpus, prompt_id)
            entry["concepts"] = [
                {"label": label, "p": cond.rows[label]}
                for label in sorted(cond.rows)
            ]
        else:
            entry["concepts"] = []
        per_prompt.append(entry)

    meta = corpus.metadata
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "audit_report",
        "run": {
            "run_id": corpus.run_id,
            "generator_id": meta.generator_id,
            "detector_id": meta.detector_id,
            "K_nominal": meta.K_nominal,
            "created_at": meta.created_at,
            "config_digest": meta.config_digest,
            "total_images": freq.total_images,
            "total_prompts": len(corpus.prompts),
        },
        "params": {
            "tau": params.tau,
            "cv_cutoff": params.cv_cutoff,
            "top_m": params.top_m,
            "k": params.k,
            "metric": params.metric,
            "min_support": params.min_support,
            "ci_groups": params.ci_groups,
            "ci_group_size": group_size,
            "seed": params.seed,
        },
        "concepts": concepts,
        "stability": [
            {
                "label": row.label, "p": row.p, "sigma": row.sigma,
                "cv": row.cv, "classification": row.classification,
            }
            for _, row in sorted(stability.rows.items())
        ],
        "cooccurrence": cooc,
        "per_prompt": per_prompt,
    }
    if params.watchlist:
        payload["params"]["watchlist"] = sorted(
            normalize_label(w) for w in params.watchlist
        )
        payload["watchlist_findings"] = [
            {
                "label": f.label, "count": f.count, "p": f.p,
                "hits": [
                    {
                        "prompt_id": h.prompt_id,
                        "image_count": h.image_count,
                        "explicit": h.explicit,
                    }
                    for h in f.hits
                ],
            }
            for f in watchlist_scan(corpus, list(params.watchlist))
        ]
    return AuditReport(payload=payload)


@dataclass(frozen=True)
class DiffRow:
    label: str
    p_a: float
    p_b: float
    delta: float  # p_b - p_a


@dataclass(frozen=True)
class RunDiff:
    run_a: str
    run_b: str
    floor: float
    deltas: tuple[DiffRow, ...]       # union vocabulary, label order
    only_a: tuple[str, ...]           # p_a >= floor and absent from b
    only_b: tuple[str, ...]

    def to_payload(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "run_diff",
            "a": self.run_a,
            "b": self.run_b,
            "floor": self.floor,
            "deltas": [
                {"label": d.label, "p_a": d.p_a, "p_b": d.p_b, "delta": d.delta}
                for d in self.deltas
            ],
            "only_a": list(self.only_a),
            "only_b": list(self.only_b),
        }


def compare_runs(a: AuditCorpus, b: AuditCorpus, floor: float = 0.05) -> RunDiff:
    """Per-concept frequency deltas between two runs, plus exclusives."""
    if not (0.0 <= floor <= 1.0):
        raise ValidationError(f"floor must be in [0,1], got {floor}")
    if not a.images or not b.images:
        raise EmptyCorpus("both corpora need at least one image")
    freq_a = concept_frequency(a)
    freq_b = concept_frequency(b)
    vocabulary = sorted(set(freq_a.rows) | set(freq_b.rows))
    deltas = []
    only_a = []
    only_b = []
    for label in vocabulary:
        p_a = freq_a.p(label)
        p_b = freq_b.p(label)
        deltas.append(DiffRow(label=label, p_a=p_a, p_b=p_b, delta=p_b - p_a))
        # exclusives demand genuine presence on one side (keeps the lists
        # disjoint even at floor 0, where zero-weight prompts can park a
        # concept at p == 0 in both runs)
        if p_b == 0.0 and p_a >= floor and p_a > 0.0:
            only_a.append(label)
        if p_a == 0.0 and p_b >= floor and p_b > 0.0:
            only_b.append(label)
    return RunDiff(run_a=a.run_id, run_b=b.run_id, floor=floor,
                   deltas=tuple(deltas), only_a=tuple(only_a),
                   only_b=tuple(only_b))


@dataclass(frozen=True)
class GenerationDirective:
    """Conditioning hints consumable by a generation bridge."""

    negative_text: str
    positive_suffix: str

    def to_payload(self) -> dict:
        return {
            "negative_text": self.negative_text,
            "positive_suffix": self.positive_suffix,
        }


def suggest_negative_prompts(corpus: AuditCorpus,
                             attenuate: set[str],
                             amplify: set[str]) -> GenerationDirective:
    """Directive attenuating some concepts and amplifying others.

    Labels are normalized and need not be present in the corpus (you may
    well want to suppress something you fear rather than found). The two
    sets must not overlap.
    """
    att = {normalize_label(c) for c in attenuate}
    amp = {normalize_label(c) for c in amplify}
    overlap = att & amp
    if overlap:
        raise OverlappingSets(f"labels in both sets: {sorted(overlap)}")
    return GenerationDirective(
        negative_text=", ".join(sorted(att)),
        positive_suffix=", ".join(sorted(amp)),
    )


# --- markdown rendering ------------------------------------------------------

def _md_table(headers: list[str], rows: list[list]) -> list[str]:
    lines = ["| " + " | ".join(headers) + " |",
             "|" + "|".join(" --- " for _ in headers) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(str(cell) for cell in row) + " |")
    return lines


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _render_markdown(payload: dict) -> str:
    run = payload["run"]
    lines = [
        f"# Audit report: {run['run_id']}",
        "",
        f"Generator `{run['generator_id']}`, detector `{run['detector_id']}`, "
        f"{run['total_images']} images over {run['total_prompts']} prompts.",
        "",
        "## Top concepts",
        "",
    ]
    rows = []
    for c in payload["concepts"]:
        ci = c.get("ci")
        ci_text = f"[{_fmt(ci['lo'])}, {_fmt(ci['hi'])}]" if ci else "-"
        rows.append([c["label"], c["count"], _fmt(c["p"]), ci_text])
    lines += _md_table(["concept", "count", "p", "95% interval"], rows)

    lines += ["", "## Stability", ""]
    lines += _md_table(
        ["concept", "p", "sigma", "cv", "class"],
        [[s["label"], _fmt(s["p"]), _fmt(s["sigma"]), _fmt(s["cv"]),
          s["classification"]] for s in payload["stability"]],
    )

    lines += ["", "## Co-occurrence highlights", ""]
    for label in sorted(payload["cooccurrence"]):
        partners = payload["cooccurrence"][label]
        if not partners:
            continue
        lines.append(f"### {label}")
        lines.append("")
        lines += _md_table(
            ["partner", "joint", "support", "confidence", "lift"],
            [[p["partner"], p["joint_count"], _fmt(p["support"]),
              _fmt(p["confidence"]), _fmt(p["lift"])] for p in partners],
        )
        lines.append("")

    if "watchlist_findings" in payload:
        lines += ["## Watchlist findings", ""]
        rows = []
        for f in payload["watchlist_findings"]:
            implicit = sum(1 for h in f["hits"] if not h["explicit"])
            rows.append([f["label"], f["count"], _fmt(f["p"]),
                         len(f["hits"]), implicit])
        lines += _md_table(
            ["concept", "count", "p", "prompt hits", "implicit hits"], rows)
        lines.append("")

    return "\n".join(lines).rstrip() + "\n"
