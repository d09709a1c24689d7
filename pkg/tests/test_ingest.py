import json

import pytest

from conceptaudit.errors import (
    AliasCycle,
    BoxOutOfRangeLine,
    DuplicateImageId,
    DuplicatePromptId,
    DuplicateSampleIndex,
    IoFailure,
    MalformedLine,
    MissingHeader,
    UnknownPromptId,
    VersionMismatch,
)
from conceptaudit.ingest import (
    apply_alias_map,
    corpus_lines,
    load_corpus,
    merge_corpora,
    parse_records,
    write_corpus,
)

HEADER = '{"schema_version":1,"run_id":"r","generator_id":"g","detector_id":"d","K_nominal":1}'
PROMPT = '{"kind":"prompt","prompt_id":"t1","text":"a prompt","weight":1.0,"provenance":"template"}'


def image_line(image_id="i1", prompt_id="t1", sample_index=0, box=(0.1, 0.1, 0.5, 0.5),
               **extra):
    doc = {
        "kind": "image",
        "image_id": image_id,
        "prompt_id": prompt_id,
        "sample_index": sample_index,
        "detections": [{"label": "Thing", "box": list(box)}],
    }
    doc.update(extra)
    return json.dumps(doc)


class TestParse:
    def test_f1_file(self, f1_lines):
        result = parse_records(f1_lines)
        corpus = result.corpus
        assert len(corpus.prompts) == 2
        assert len(corpus.images) == 4
        assert result.body_lines == result.records == 6
        assert corpus.presence == {
            "man": {"i1", "i2", "i4"},
            "shoes": {"i1", "i3", "i4"},
            "dog": {"i2"},
            "woman": {"i3"},
        }
        assert corpus.metadata.K_nominal == 2

    def test_header_only_is_valid(self):
        corpus = parse_records([HEADER]).corpus
        assert corpus.total_images == 0
        assert corpus.prompts == {}

    def test_label_normalized(self):
        corpus = parse_records([HEADER, PROMPT, image_line()]).corpus
        assert corpus.presence_of("i1") == {"thing"}

    def test_pixel_boxes_converted(self):
        line = image_line(box=(64, 32, 192, 96), image_width=256, image_height=128)
        corpus = parse_records([HEADER, PROMPT, line]).corpus
        det = corpus.images["i1"].detections[0]
        assert det.box.as_list() == [0.25, 0.25, 0.75, 0.75]

    def test_box_out_of_range_line_number(self):
        bad = image_line(box=(0.7, 0.1, 0.5, 0.9))  # x1 < x0
        with pytest.raises(BoxOutOfRangeLine) as err:
            parse_records([HEADER, PROMPT, bad])
        assert err.value.line_no == 3

    def test_missing_header(self):
        with pytest.raises(MissingHeader):
            parse_records([PROMPT])
        with pytest.raises(MissingHeader):
            parse_records([])

    def test_version_mismatch(self):
        tampered = HEADER.replace('"schema_version":1', '"schema_version":2')
        with pytest.raises(VersionMismatch):
            parse_records([tampered])

    def test_unknown_prompt_id(self):
        with pytest.raises(UnknownPromptId) as err:
            parse_records([HEADER, image_line(prompt_id="ghost")])
        assert err.value.line_no == 2

    def test_prompt_line_may_follow_image_line(self):
        corpus = parse_records([HEADER, image_line(), PROMPT]).corpus
        assert corpus.total_images == 1

    def test_duplicates(self):
        with pytest.raises(DuplicateImageId):
            parse_records([HEADER, PROMPT, image_line(), image_line(sample_index=1)])
        with pytest.raises(DuplicateSampleIndex):
            parse_records([HEADER, PROMPT, image_line(), image_line(image_id="i2")])
        with pytest.raises(DuplicatePromptId):
            parse_records([HEADER, PROMPT, PROMPT])

    def test_malformed_json(self):
        with pytest.raises(MalformedLine) as err:
            parse_records([HEADER, "{nope"])
        assert err.value.line_no == 2

    def test_lenient_accounting(self):
        lines = [
            HEADER,
            PROMPT,
            image_line(),
            "{broken",
            image_line(image_id="i2", prompt_id="ghost", sample_index=1),
            image_line(image_id="i3", sample_index=2, box=(0.9, 0.1, 0.2, 0.5)),
            image_line(image_id="i4", sample_index=3),
        ]
        result = parse_records(lines, lenient=True)
        assert result.body_lines == 6
        assert result.records == 3  # prompt + i1 + i4
        assert len(result.errors) == 3
        assert result.records + len(result.errors) == result.body_lines
        assert sorted(err.line_no for err in result.errors) == [4, 5, 6]
        assert result.corpus.total_images == 2


class TestPersistence:
    def test_round_trip_identity(self, f1_corpus, tmp_path):
        dest = tmp_path / "f1.corpus"
        write_corpus(f1_corpus, dest)
        loaded = load_corpus(dest)
        assert loaded == f1_corpus
        assert dict(loaded.presence) == dict(f1_corpus.presence)

    def test_round_trip_empty(self, tmp_path):
        corpus = parse_records([HEADER]).corpus
        dest = tmp_path / "empty.corpus"
        write_corpus(corpus, dest)
        assert load_corpus(dest) == corpus

    def test_write_deterministic(self, f1_corpus, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        write_corpus(f1_corpus, a)
        write_corpus(f1_corpus, b)
        assert a.read_bytes() == b.read_bytes()

    def test_tampered_version_rejected(self, f1_corpus, tmp_path):
        dest = tmp_path / "f1.corpus"
        write_corpus(f1_corpus, dest)
        lines = dest.read_text().splitlines()
        lines[0] = lines[0].replace('"schema_version":1', '"schema_version":99')
        dest.write_text("\n".join(lines))
        with pytest.raises(VersionMismatch):
            load_corpus(dest)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            load_corpus(tmp_path / "nope.corpus")

    def test_metadata_survives(self, f1_corpus, tmp_path):
        dest = tmp_path / "f1.corpus"
        write_corpus(f1_corpus, dest)
        loaded = load_corpus(dest)
        assert loaded.metadata.created_at == "2026-01-05T12:00:00Z"
        assert loaded.metadata.config_digest == "fixture-f1"


class TestAliases:
    def test_merge_dedupe(self):
        line = json.dumps({
            "kind": "image", "image_id": "i1", "prompt_id": "t1", "sample_index": 0,
            "detections": [
                {"label": "nude", "box": [0.1, 0.1, 0.5, 0.5]},
                {"label": "naked", "box": [0.2, 0.2, 0.6, 0.6]},
            ],
        })
        corpus = parse_records([HEADER, PROMPT, line]).corpus
        folded = apply_alias_map(corpus, {"nude": "naked"})
        assert folded.presence_of("i1") == {"naked"}
        assert len(folded.images["i1"].detections) == 2  # boxes retained
        # original untouched
        assert corpus.presence_of("i1") == {"naked", "nude"}

    def test_empty_map_identity(self, f1_corpus):
        assert apply_alias_map(f1_corpus, {}) == f1_corpus

    def test_chain_rejected(self, f1_corpus):
        with pytest.raises(AliasCycle):
            apply_alias_map(f1_corpus, {"a": "b", "b": "c"})

    def test_presence_index_rebuilt(self, f1_corpus):
        folded = apply_alias_map(f1_corpus, {"dog": "man"})
        assert folded.presence["man"] == {"i1", "i2", "i4"}
        assert "dog" not in folded.presence


class TestMerge:
    def test_shards_merge(self, f1_lines):
        header, prompts, images = f1_lines[0], f1_lines[1:3], f1_lines[3:]
        shard_a = parse_records([header, *prompts, *images[:2]]).corpus
        shard_b = parse_records([header, *prompts, *images[2:]]).corpus
        merged = merge_corpora([shard_a, shard_b])
        full = parse_records(f1_lines).corpus
        assert merged == full

    def test_mismatched_run_rejected(self, f1_lines):
        other = [line.replace('"run_id":"f1"', '"run_id":"f2"')
                 for line in f1_lines]
        a = parse_records(f1_lines).corpus
        b = parse_records(other).corpus
        with pytest.raises(Exception):
            merge_corpora([a, b])

    def test_canonical_lines_reparse(self, f1_corpus):
        again = parse_records(corpus_lines(f1_corpus)).corpus
        assert again == f1_corpus
