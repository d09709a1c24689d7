import json

import pytest

from conceptaudit.errors import EmptyCorpus, OverlappingSets, ValidationError
from conceptaudit.ingest import parse_records
from conceptaudit.metrics import concept_frequency, concept_stability
from conceptaudit.reporting import (
    ReportParams,
    build_report,
    canonical_json,
    compare_runs,
    suggest_negative_prompts,
)

from helpers import make_corpus


class TestBuildReport:
    def test_frequency_block_matches_engine(self, f1_corpus):
        report = build_report(f1_corpus)
        freq = concept_frequency(f1_corpus)
        by_label = {c["label"]: c for c in report.payload["concepts"]}
        assert by_label["man"]["p"] == freq.rows["man"].p
        assert by_label["man"]["count"] == freq.rows["man"].count
        assert [c["label"] for c in report.payload["concepts"]] == \
            ["man", "shoes", "dog", "woman"]

    def test_stability_block_matches_engine(self, f1_corpus):
        params = ReportParams(tau=0.0, cv_cutoff=1.0)
        report = build_report(f1_corpus, params)
        stability = concept_stability(f1_corpus, tau=0.0, cv_cutoff=1.0)
        for entry in report.payload["stability"]:
            row = stability.rows[entry["label"]]
            assert entry["sigma"] == row.sigma
            assert entry["cv"] == row.cv
            assert entry["classification"] == row.classification

    def test_deterministic_bytes(self, f1_corpus):
        params = ReportParams(seed=7)
        a = build_report(f1_corpus, params).to_json()
        b = build_report(f1_corpus, params).to_json()
        assert a == b

    def test_reparse_rerender_identity(self, f1_corpus):
        text = build_report(f1_corpus).to_json()
        assert canonical_json(json.loads(text)) == text

    def test_watchlist_section_only_when_provided(self, f1_corpus, watch_corpus):
        plain = build_report(f1_corpus)
        assert "watchlist_findings" not in plain.payload
        flagged = build_report(watch_corpus, ReportParams(watchlist=("naked",)))
        assert flagged.payload["watchlist_findings"][0]["label"] == "naked"

    def test_params_embedded(self, f1_corpus):
        params = ReportParams(tau=0.1, cv_cutoff=2.0, seed=13)
        payload = build_report(f1_corpus, params).payload
        assert payload["params"]["tau"] == 0.1
        assert payload["params"]["cv_cutoff"] == 2.0
        assert payload["params"]["seed"] == 13

    def test_ci_present_on_f1(self, f1_corpus):
        payload = build_report(f1_corpus).payload
        man = next(c for c in payload["concepts"] if c["label"] == "man")
        assert man["ci"] is not None
        assert man["ci"]["group_size"] == 2  # min(1000, 4 // 2)

    def test_empty_corpus_rejected(self):
        corpus = make_corpus("r", {"t1": []})
        with pytest.raises(EmptyCorpus):
            build_report(corpus)

    def test_markdown_renders(self, f1_corpus):
        text = build_report(f1_corpus).to_markdown()
        assert "# Audit report: f1" in text
        assert "| man |" in text

    def test_bad_params(self):
        with pytest.raises(ValidationError):
            ReportParams(tau=1.5)
        with pytest.raises(ValidationError):
            ReportParams(top_m=0)
        with pytest.raises(ValidationError):
            ReportParams(metric="nope")


class TestCompareRuns:
    def test_self_diff_zero(self, f1_corpus):
        diff = compare_runs(f1_corpus, f1_corpus, floor=0.05)
        assert all(d.delta == 0.0 for d in diff.deltas)
        assert diff.only_a == () and diff.only_b == ()

    def test_exclusive_concept(self, f1_lines):
        full = parse_records(f1_lines).corpus
        without_dog = parse_records([
            line.replace('{"label":"dog","box":[0.6,0.5,0.9,0.95],"score":0.85}', "")
                .replace(',]', ']')
            for line in f1_lines
        ]).corpus
        assert "dog" not in without_dog.presence
        diff = compare_runs(full, without_dog, floor=0.25)
        assert diff.only_a == ("dog",)
        assert diff.only_b == ()
        dog = next(d for d in diff.deltas if d.label == "dog")
        assert dog.delta == -0.25

    def test_antisymmetry(self, f1_corpus):
        other = make_corpus("other", {"t1": [["man"], ["cat"]]})
        ab = compare_runs(f1_corpus, other, floor=0.1)
        ba = compare_runs(other, f1_corpus, floor=0.1)
        deltas_ab = {d.label: d.delta for d in ab.deltas}
        deltas_ba = {d.label: d.delta for d in ba.deltas}
        assert set(deltas_ab) == set(deltas_ba)
        for label, delta in deltas_ab.items():
            assert delta == -deltas_ba[label]
        assert ab.only_a == ba.only_b and ab.only_b == ba.only_a

    def test_floor_validation(self, f1_corpus):
        with pytest.raises(ValidationError):
            compare_runs(f1_corpus, f1_corpus, floor=1.5)

    def test_empty_rejected(self, f1_corpus):
        empty = make_corpus("e", {"t1": []})
        with pytest.raises(EmptyCorpus):
            compare_runs(f1_corpus, empty)


class TestNegativePrompts:
    def test_directive(self, f1_corpus):
        directive = suggest_negative_prompts(
            f1_corpus, attenuate={"wheelchair"}, amplify={"person", "face"})
        assert directive.negative_text == "wheelchair"
        assert directive.positive_suffix == "face, person"

    def test_empty_sets(self, f1_corpus):
        directive = suggest_negative_prompts(f1_corpus, set(), set())
        assert directive.negative_text == ""
        assert directive.positive_suffix == ""

    def test_overlap_rejected(self, f1_corpus):
        with pytest.raises(OverlappingSets):
            suggest_negative_prompts(f1_corpus, {"face"}, {"face", "person"})

    def test_labels_normalized(self, f1_corpus):
        directive = suggest_negative_prompts(f1_corpus, {"  Wheel Chair "}, set())
        assert directive.negative_text == "wheel chair"
