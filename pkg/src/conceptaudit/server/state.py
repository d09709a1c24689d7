"""Served corpora and the table cache behind the read-only API."""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Callable, TypeVar

from ..core import AuditCorpus
from ..metrics import FrequencyTable, StabilityTable, concept_frequency, concept_stability
from ..mining import (
    PartnerRow,
    ReverseIndexEntry,
    reverse_index,
    top_cooccurring,
)
from ..reporting import RunDiff, compare_runs

T = TypeVar("T")


class SingleFlightCache:
    """Memoization with per-key locking: concurrent misses compute once."""

    def __init__(self):
        self._values: dict = {}
        self._locks: dict = {}
        self._guard = threading.Lock()

    def get(self, key, compute: Callable[[], T]) -> T:
        with self._guard:
            if key in self._values:
                return self._values[key]
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            with self._guard:
                if key in self._values:
                    return self._values[key]
            value = compute()
            with self._guard:
                self._values[key] = value
            return value

    def __len__(self) -> int:
        return len(self._values)


class ServerState:
    """Immutable corpora plus cached derived tables, keyed by parameters."""

    def __init__(self, corpora: dict[str, AuditCorpus] | None = None,
                 media_root: str | Path | None = None):
        self.corpora: dict[str, AuditCorpus] = dict(corpora or {})
        self.media_root = Path(media_root) if media_root else None
        self.cache = SingleFlightCache()

    def add_corpus(self, corpus: AuditCorpus) -> None:
        if corpus.run_id in self.corpora:
            raise ValueError(f"run {corpus.run_id!r} already loaded")
        self.corpora[corpus.run_id] = corpus

    def run_ids(self) -> list[str]:
        return sorted(self.corpora)

    def corpus(self, run_id: str) -> AuditCorpus | None:
        return self.corpora.get(run_id)

    # Derived tables; cache keys embed every parameter that affects the value.

    def frequency(self, run_id: str) -> FrequencyTable:
        return self.cache.get(
            ("freq", run_id),
            lambda: concept_frequency(self.corpora[run_id]),
        )

    def stability(self, run_id: str, tau: float, cv_cutoff: float) -> StabilityTable:
        return self.cache.get(
            ("stab", run_id, tau, cv_cutoff),
            lambda: concept_stability(self.corpora[run_id], tau=tau, cv_cutoff=cv_cutoff),
        )

    def partners(self, run_id: str, label: str, k: int, metric: str,
                 min_support: float) -> list[PartnerRow]:
        return self.cache.get(
            ("cooc", run_id, label, k, metric, min_support),
            lambda: top_cooccurring(self.corpora[run_id], label, k=k,
                                    metric=metric, min_support=min_support),
        )

    def reverse(self, run_id: str, label: str, cap: int) -> ReverseIndexEntry:
        return self.cache.get(
            ("reverse", run_id, label, cap),
            lambda: reverse_index(self.corpora[run_id], label, evidence_cap=cap),
        )

    def diff(self, run_a: str, run_b: str, floor: float) -> RunDiff:
        return self.cache.get(
            ("diff", run_a, run_b, floor),
            lambda: compare_runs(self.corpora[run_a], self.corpora[run_b], floor=floor),
        )
