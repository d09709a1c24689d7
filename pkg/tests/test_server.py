import threading

import pytest
from fastapi.testclient import TestClient

from conceptaudit.server import ServerState, SingleFlightCache, create_app


@pytest.fixture()
def state(f1_corpus, tmp_path):
    media = tmp_path / "media"
    media.mkdir()
    (media / "i1.png").write_bytes(b"\x89PNG fake")
    state = ServerState(media_root=media)
    state.add_corpus(f1_corpus)
    return state


@pytest.fixture()
def client(state):
    return TestClient(create_app(state, cors_origin="*"))


class TestRuns:
    def test_list(self, client):
        body = client.get("/runs").json()
        assert body["total"] == 1
        assert body["items"][0]["run_id"] == "f1"
        assert body["items"][0]["generator_id"] == "toy-generator"
        assert body["items"][0]["total_images"] == 4

    def test_empty_server(self):
        client = TestClient(create_app(ServerState()))
        body = client.get("/runs").json()
        assert body == {"total": 0, "offset": 0, "limit": 100, "items": []}

    def test_pagination(self, f1_corpus):
        state = ServerState()
        state.add_corpus(f1_corpus)
        client = TestClient(create_app(state))
        body = client.get("/runs", params={"offset": 1, "limit": 5}).json()
        assert body["total"] == 1
        assert body["items"] == []


class TestConcepts:
    def test_sorted_by_p_ties_lexicographic(self, client):
        body = client.get("/runs/f1/concepts", params={"sort": "p"}).json()
        labels = [row["label"] for row in body["items"]]
        assert labels == ["man", "shoes", "dog", "woman"]
        assert body["items"][0]["p"] == 0.75

    def test_filter_substring(self, client):
        body = client.get("/runs/f1/concepts", params={"filter": "sho"}).json()
        assert [row["label"] for row in body["items"]] == ["shoes"]
        assert body["total"] == 1

    def test_filter_case_insensitive(self, client):
        body = client.get("/runs/f1/concepts", params={"filter": "SHO"}).json()
        assert [row["label"] for row in body["items"]] == ["shoes"]

    def test_tau_excludes(self, client):
        body = client.get("/runs/f1/concepts", params={"tau": 0.5}).json()
        assert {row["label"] for row in body["items"]} == {"man", "shoes"}

    def test_sort_cv_descending(self, client):
        body = client.get("/runs/f1/concepts", params={"sort": "cv"}).json()
        cvs = [row["cv"] for row in body["items"]]
        assert cvs == sorted(cvs, reverse=True)
        assert body["items"][0]["classification"] == "triggered"

    def test_unknown_run_404(self, client):
        resp = client.get("/runs/ghost/concepts")
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "unknown_run"

    def test_bad_sort_400(self, client):
        resp = client.get("/runs/f1/concepts", params={"sort": "nope"})
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "bad_param"

    def test_bad_tau_400(self, client):
        assert client.get("/runs/f1/concepts", params={"tau": 2}).status_code == 400

    def test_pagination_stable_total(self, client):
        first = client.get("/runs/f1/concepts", params={"limit": 2}).json()
        second = client.get("/runs/f1/concepts",
                            params={"limit": 2, "offset": 2}).json()
        assert first["total"] == second["total"] == 4
        assert len(first["items"]) == 2 and len(second["items"]) == 2
        assert {r["label"] for r in first["items"]}.isdisjoint(
            {r["label"] for r in second["items"]})


class TestConceptDetail:
    def test_shoes_inspection(self, client):
        body = client.get("/runs/f1/concepts/shoes").json()
        assert body["p"] == 0.75
        assert [(h["prompt_id"], h["image_count"]) for h in body["prompt_hits"]] == \
            [("t2", 2), ("t1", 1)]
        assert len(body["evidence"]) == 3
        assert body["evidence"][0]["media_url"] == "/media/i1?run=f1"
        assert all(len(e["boxes"]) == 1 for e in body["evidence"])

    def test_label_with_spaces_normalized(self, client):
        assert client.get("/runs/f1/concepts/%20SHOES%20").json()["label"] == "shoes"

    def test_unknown_concept_404(self, client):
        resp = client.get("/runs/f1/concepts/ghost")
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "unknown_concept"

    def test_partners_included(self, client):
        body = client.get("/runs/f1/concepts/man").json()
        assert [p["partner"] for p in body["partners"]] == ["shoes", "dog"]


class TestCooccurrenceEndpoint:
    def test_f1_man_support(self, client):
        body = client.get("/runs/f1/cooccurrence",
                          params={"c": "man", "k": 2, "metric": "support"}).json()
        assert [p["partner"] for p in body["items"]] == ["shoes", "dog"]
        assert body["items"][0]["support"] == 0.5

    def test_bad_metric_400(self, client):
        resp = client.get("/runs/f1/cooccurrence",
                          params={"c": "man", "metric": "nope"})
        assert resp.status_code == 400

    def test_unknown_concept_404(self, client):
        resp = client.get("/runs/f1/cooccurrence", params={"c": "ghost"})
        assert resp.status_code == 404

    def test_no_partner_above_support(self, client):
        body = client.get("/runs/f1/cooccurrence",
                          params={"c": "woman", "min_support": 0.9}).json()
        assert body["items"] == []


class TestCompare:
    def test_self_compare_zero(self, client):
        body = client.get("/compare", params={"a": "f1", "b": "f1"}).json()
        assert all(d["delta"] == 0.0 for d in body["deltas"])
        assert body["only_a"] == [] and body["only_b"] == []
        assert body["total"] == 4

    def test_unknown_run(self, client):
        assert client.get("/compare", params={"a": "f1", "b": "x"}).status_code == 404

    def test_bad_floor(self, client):
        resp = client.get("/compare", params={"a": "f1", "b": "f1", "floor": 2})
        assert resp.status_code == 400


class TestMedia:
    def test_serves_file(self, client):
        resp = client.get("/media/i1", params={"run": "f1"})
        assert resp.status_code == 200
        assert resp.content == b"\x89PNG fake"

    def test_missing_file_404(self, client):
        resp = client.get("/media/i2")  # i2.png never written
        assert resp.status_code == 404

    def test_unknown_image_404(self, client):
        assert client.get("/media/ghost").status_code == 404


class TestReadOnlyDeterminism:
    def test_repeated_requests_identical(self, client):
        for path, params in [
            ("/runs", {}),
            ("/runs/f1/concepts", {"sort": "cv"}),
            ("/runs/f1/concepts/shoes", {}),
            ("/runs/f1/cooccurrence", {"c": "man"}),
            ("/compare", {"a": "f1", "b": "f1"}),
        ]:
            first = client.get(path, params=params)
            second = client.get(path, params=params)
            assert first.content == second.content


class TestSingleFlight:
    def test_concurrent_misses_compute_once(self):
        cache = SingleFlightCache()
        calls = []
        gate = threading.Barrier(8)

        def compute():
            calls.append(1)
            return 42

        def worker():
            gate.wait()
            assert cache.get("key", compute) == 42

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(calls) == 1

    def test_different_params_different_entries(self, state):
        state.stability("f1", 0.0, 1.0)
        state.stability("f1", 0.1, 1.0)
        assert len(state.cache) == 2
