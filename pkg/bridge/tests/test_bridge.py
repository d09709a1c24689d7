import json
import subprocess
import sys
from pathlib import Path

import pytest

from t2ibridge.config import BridgeConfig, load_config
from t2ibridge.pipeline import (
    PromptFileError,
    build_record_lines,
    detect_images,
    generate_images,
    load_prompt_jobs,
    run_bridge,
)
from t2ibridge.wire import WireError, validate_lines

WORKBENCH_CLI = [sys.executable, "-m", "conceptaudit.cli"]


def write_prompts(path: Path, texts: list[str]) -> None:
    lines = [
        json.dumps({
            "kind": "prompt",
            "prompt_id": f"p{i:02d}",
            "text": text,
            "weight": 1.0,
            "provenance": "template",
        })
        for i, text in enumerate(texts)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def workbench_ingest(records: Path, out: Path) -> subprocess.CompletedProcess:
    return subprocess.run(
        [*WORKBENCH_CLI, "ingest", "--records", str(records), "--out", str(out)],
        capture_output=True, text=True,
    )


@pytest.fixture()
def prompts_path(tmp_path) -> Path:
    path = tmp_path / "prompts.jsonl"
    write_prompts(path, [
        "A photo of a man running in a park",
        "A photo of a woman jogging",
        "A dog with a ball",
    ])
    return path


class TestSmoke:
    def test_three_prompts_k2_pass_strict_ingest(self, prompts_path, tmp_path):
        config = BridgeConfig(k=2, seed=7)
        records = tmp_path / "records.jsonl"
        media = tmp_path / "media"
        batch = run_bridge(prompts_path, config, records, media)

        image_lines = [
            json.loads(line)
            for line in records.read_text().splitlines()
            if '"kind":"image"' in line
        ]
        assert len(image_lines) == 6
        assert len(batch.entries) == 6
        assert batch.failures == 0
        assert all((media / f"{e.image_id}.png").is_file() for e in batch.entries)

        corpus_path = tmp_path / "run.corpus"
        proc = workbench_ingest(records, corpus_path)
        assert proc.returncode == 0, proc.stderr
        assert corpus_path.is_file()

    def test_pixel_boxes_carry_dimensions(self, prompts_path, tmp_path):
        config = BridgeConfig(k=1, image_size=128)
        records = tmp_path / "records.jsonl"
        run_bridge(prompts_path, config, records, None)
        image_docs = [
            json.loads(line)
            for line in records.read_text().splitlines()
            if '"kind":"image"' in line
        ]
        for doc in image_docs:
            assert doc["image_width"] == 128 and doc["image_height"] == 128
            for det in doc["detections"]:
                x0, y0, x1, y1 = det["box"]
                assert 0 <= x0 < x1 <= 128 and 0 <= y0 < y1 <= 128

    def test_multi_object_prompt_detects_distinct_boxes(self, tmp_path):
        prompts = tmp_path / "p.jsonl"
        write_prompts(prompts, ["a man and a woman and a dog"])
        records = tmp_path / "records.jsonl"
        run_bridge(prompts, BridgeConfig(k=1, seed=3), records, None)
        doc = next(json.loads(line) for line in records.read_text().splitlines()
                   if '"kind":"image"' in line)
        labels = {d["label"] for d in doc["detections"]}
        assert {"man", "woman", "dog"} <= labels
        boxes = [tuple(d["box"]) for d in doc["detections"]]
        assert len(set(boxes)) == len(boxes)

    def test_deterministic_for_fixed_seed(self, prompts_path, tmp_path):
        config = BridgeConfig(k=2, seed=11)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run_bridge(prompts_path, config, a, None)
        run_bridge(prompts_path, config, b, None)
        strip = lambda text: [line for line in text.splitlines()
                              if '"schema_version"' not in line]  # header has a timestamp
        assert strip(a.read_text()) == strip(b.read_text())


class TestVqaMode:
    def test_one_full_image_detection_per_image(self, prompts_path, tmp_path):
        config = BridgeConfig(k=2, detector_mode="vqa_label")
        records = tmp_path / "records.jsonl"
        run_bridge(prompts_path, config, records, None)
        image_docs = [
            json.loads(line)
            for line in records.read_text().splitlines()
            if '"kind":"image"' in line
        ]
        assert len(image_docs) == 6
        for doc in image_docs:
            assert len(doc["detections"]) == 1
            assert doc["detections"][0]["box"] == [0.0, 0.0, 1.0, 1.0]
            assert "image_width" not in doc
        corpus_path = tmp_path / "run.corpus"
        proc = workbench_ingest(records, corpus_path)
        assert proc.returncode == 0, proc.stderr


class TestNegativeDirective:
    @staticmethod
    def wheelchair_rate(records: Path) -> float:
        docs = [json.loads(line) for line in records.read_text().splitlines()
                if '"kind":"image"' in line]
        hits = sum(1 for doc in docs
                   if any(d["label"] == "wheelchair" for d in doc["detections"]))
        return hits / len(docs)

    def test_attenuation_reduces_frequency(self, tmp_path):
        prompts = tmp_path / "p.jsonl"
        write_prompts(prompts, ["A person with a disability"])
        baseline = tmp_path / "baseline.jsonl"
        run_bridge(prompts, BridgeConfig(k=30, seed=1), baseline, None)
        treated = tmp_path / "treated.jsonl"
        run_bridge(
            prompts,
            BridgeConfig(k=30, seed=1, negative_text="wheelchair",
                         positive_suffix="face, person"),
            treated, None,
        )
        base_rate = self.wheelchair_rate(baseline)
        treated_rate = self.wheelchair_rate(treated)
        assert base_rate > 0.8
        assert treated_rate < base_rate
        assert treated_rate == 0.0


class TestManifest:
    def test_duplicate_prompt_lines_accumulate(self, tmp_path):
        path = tmp_path / "p.jsonl"
        line = json.dumps({"kind": "prompt", "prompt_id": "p0",
                           "text": "a dog", "weight": 1.0,
                           "provenance": "empirical"})
        path.write_text(f"{line}\n{line}\n", encoding="utf-8")
        jobs = load_prompt_jobs(path)
        assert len(jobs) == 1 and jobs[0].occurrences == 2
        batch = generate_images(jobs, BridgeConfig(k=2), None)
        assert len(batch.entries) == 4  # 2 occurrences x K=2
        indices = [e.sample_index for e in batch.entries]
        assert indices == [0, 1, 2, 3]

    def test_conflicting_duplicate_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        mk = lambda text: json.dumps({"kind": "prompt", "prompt_id": "p0",
                                      "text": text, "weight": 1.0,
                                      "provenance": "empirical"})
        path.write_text(mk("a dog") + "\n" + mk("a cat") + "\n")
        with pytest.raises(PromptFileError):
            load_prompt_jobs(path)

    def test_empty_manifest_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(PromptFileError):
            load_prompt_jobs(path)


class TestFailureHandling:
    def test_failed_image_becomes_annotated_empty_record(self, tmp_path, monkeypatch):
        from t2ibridge import backends

        class Flaky:
            def __init__(self, config):
                self.calls = 0

            def generate(self, text, seed):
                self.calls += 1
                if self.calls == 2:
                    raise RuntimeError("boom")
                from t2ibridge.scene import render_scene
                return render_scene(["dog"], 64, seed)

        monkeypatch.setattr(backends, "get_backend", lambda config: Flaky(config))
        import t2ibridge.pipeline as pipeline

        monkeypatch.setattr(pipeline, "get_backend", lambda config: Flaky(config))
        prompts = tmp_path / "p.jsonl"
        write_prompts(prompts, ["a dog"])
        jobs = load_prompt_jobs(prompts)
        config = BridgeConfig(k=3)
        batch = generate_images(jobs, config, None)
        assert batch.failures == 1
        detections = detect_images(batch, config)
        lines = build_record_lines(jobs, batch, detections, config)
        validate_lines(lines)  # still a valid stream
        failed = [json.loads(line) for line in lines
                  if '"error"' in line]
        assert len(failed) == 1
        assert failed[0]["detections"] == []


class TestWireSelfCheck:
    def test_rejects_bad_box(self):
        lines = [
            '{"schema_version":1,"run_id":"r","generator_id":"g","detector_id":"d","K_nominal":1}',
            '{"kind":"prompt","prompt_id":"p","text":"t","weight":1.0,"provenance":"empirical"}',
            '{"kind":"image","image_id":"i","prompt_id":"p","sample_index":0,'
            '"detections":[{"label":"a","box":[0.9,0.1,0.2,0.5]}]}',
        ]
        with pytest.raises(WireError) as err:
            validate_lines(lines)
        assert err.value.line_no == 3

    def test_rejects_unknown_prompt_reference(self):
        lines = [
            '{"schema_version":1,"run_id":"r","generator_id":"g","detector_id":"d","K_nominal":1}',
            '{"kind":"image","image_id":"i","prompt_id":"ghost","sample_index":0,"detections":[]}',
        ]
        with pytest.raises(WireError):
            validate_lines(lines)


class TestConfig:
    def test_load_and_digest_stability(self, tmp_path):
        path = tmp_path / "bridge.cfg"
        path.write_text(
            "generator_id: shapes\ndetector_id: shape-color\n"
            "detector_mode: caption_grounding\nk: 2\nseed: 9\n",
            encoding="utf-8",
        )
        config = load_config(path)
        assert config.k == 2
        assert config.digest() == load_config(path).digest()
        assert config.effective_run_id.startswith("bridge-")

    def test_bad_mode_rejected(self, tmp_path):
        path = tmp_path / "bridge.cfg"
        path.write_text("detector_mode: nonsense\n", encoding="utf-8")
        with pytest.raises(Exception):
            load_config(path)


class TestFullPipe:
    def test_expand_bridge_ingest_audit(self, tmp_path):
        spec = tmp_path / "spec.yaml"
        spec.write_text(
            'mode: cartesian_uniform\n'
            'templates:\n'
            '  - template: "A photo of a [age] person [action]"\n'
            '    values:\n'
            '      age: [young, old]\n'
            '      action: [jogging, running]\n',
            encoding="utf-8",
        )
        prompts = tmp_path / "prompts.jsonl"
        proc = subprocess.run(
            [*WORKBENCH_CLI, "expand-prompts", "--prompt-spec", str(spec),
             "--out", str(prompts)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr

        records = tmp_path / "records.jsonl"
        run_bridge(prompts, BridgeConfig(k=3, seed=5), records,
                   tmp_path / "media")

        corpus = tmp_path / "run.corpus"
        assert workbench_ingest(records, corpus).returncode == 0

        report_path = tmp_path / "report.json"
        proc = subprocess.run(
            [*WORKBENCH_CLI, "audit", "--corpus", str(corpus),
             "--tau", "0.0", "--out", str(report_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        report = json.loads(report_path.read_text())
        labels = {c["label"] for c in report["concepts"]}
        assert "shoes" in labels  # jogging/running prompts wear shoes
        assert report["run"]["total_images"] == 12
