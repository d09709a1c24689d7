"""Concept-statistics auditing workbench for text-to-image output corpora.

Characterizes what a generation run actually produced: per-concept
frequencies, per-prompt conditionals, stability across prompts,
co-occurrence rules (support/confidence/lift), watchlist scans, and
run-vs-run diffs, over declarative or empirical prompt distributions.
"""

from .core import (
    AuditCorpus,
    BoundingBox,
    Detection,
    ImageRecord,
    PromptRecord,
    RunMetadata,
    build_corpus,
    normalize_label,
    presence_set,
)
from .ingest import (
    apply_alias_map,
    load_corpus,
    parse_records,
    write_corpus,
)
from .metrics import (
    concept_frequency,
    concept_stability,
    conditional_frequency,
    subsample_ci,
)
from .mining import (
    cooccurrence,
    reverse_index,
    top_cooccurring,
    watchlist_scan,
)
from .prompts import (
    PromptDistributionSpec,
    PromptTemplate,
    expand_distribution,
    parse_template,
    sample_prompts,
)
from .reporting import (
    ReportParams,
    build_report,
    compare_runs,
    suggest_negative_prompts,
)

__version__ = "0.1.0"

__all__ = [
    "AuditCorpus",
    "BoundingBox",
    "Detection",
    "ImageRecord",
    "PromptRecord",
    "PromptDistributionSpec",
    "PromptTemplate",
    "ReportParams",
    "RunMetadata",
    "apply_alias_map",
    "build_corpus",
    "build_report",
    "compare_runs",
    "concept_frequency",
    "concept_stability",
    "conditional_frequency",
    "cooccurrence",
    "expand_distribution",
    "load_corpus",
    "normalize_label",
    "parse_records",
    "parse_template",
    "presence_set",
    "reverse_index",
    "sample_prompts",
    "subsample_ci",
    "suggest_negative_prompts",
    "top_cooccurring",
    "watchlist_scan",
    "write_corpus",
]
