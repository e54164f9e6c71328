import random

import numpy as np
import pytest
from fastapi.testclient import TestClient

from stanceprop.features import BrownClusterMap
from stanceprop.pipeline import PipelineSettings, RumourClassifier
from stanceprop.service import create_app

from .conftest import make_rumour, mixed_stances


@pytest.fixture(scope="module")
def demo_map():
    return BrownClusterMap.bundled_demo()


def build_rumours():
    rng = random.Random(0)
    return [
        make_rumour("alpha", mixed_stances(rng, 25), seed=1),
        make_rumour("beta", mixed_stances(rng, 20), seed=2),
    ]


@pytest.fixture
def client(demo_map):
    app = create_app(build_rumours(), PipelineSettings(), cluster_map=demo_map)
    with TestClient(app) as c:
        yield c


class TestListRumours:
    def test_fresh_load_has_zero_annotations(self, client):
        body = client.get("/rumours").json()
        assert [r["rumour_id"] for r in body] == ["alpha", "beta"]
        assert all(r["annotated_count"] == 0 for r in body)
        assert body[0]["message_count"] == 25

    def test_counts_track_annotations(self, client):
        for i in range(3):
            client.post("/rumours/alpha/annotations",
                        json={"message_id": f"alpha-m{i:04d}", "stance": 1})
        body = client.get("/rumours").json()
        alpha = next(r for r in body if r["rumour_id"] == "alpha")
        assert alpha["annotated_count"] == 3
        assert alpha["revision"] == 3


class TestMessagePages:
    def test_fresh_rumour_has_no_predictions(self, client):
        page = client.get("/rumours/alpha/messages", params={"limit": 10}).json()
        assert len(page["messages"]) == 10
        assert page["revision"] == 0
        assert all(m["predicted"] is None for m in page["messages"])
        ids = [m["id"] for m in page["messages"]]
        assert ids == sorted(ids)  # chronological == id order in the fixture

    def test_cursor_beyond_end_is_empty(self, client):
        page = client.get("/rumours/alpha/messages",
                          params={"cursor": 999, "limit": 10}).json()
        assert page["messages"] == []
        assert page["next_cursor"] is None

    def test_probs_sum_to_one_after_propagation(self, client):
        client.post("/rumours/alpha/annotations",
                    json={"message_id": "alpha-m0000", "stance": 1})
        client.post("/rumours/alpha/annotations",
                    json={"message_id": "alpha-m0001", "stance": -1})
        page = client.get("/rumours/alpha/messages", params={"limit": 25}).json()
        for m in page["messages"]:
            assert m["probs"] is not None
            assert sum(m["probs"]) == pytest.approx(1.0, abs=1e-9)

    def test_unknown_rumour_404(self, client):
        assert client.get("/rumours/ghost/messages").status_code == 404

    def test_slashed_rumour_ids_route_correctly(self, demo_map):
        rng = random.Random(3)
        rumour = make_rumour("storyX/claim-9", mixed_stances(rng, 20), seed=9)
        app = create_app([rumour], PipelineSettings(), cluster_map=demo_map)
        with TestClient(app) as c:
            page = c.get("/rumours/storyX/claim-9/messages").json()
            assert page["rumour_id"] == "storyX/claim-9"
            ack = c.post("/rumours/storyX/claim-9/annotations",
                         json={"message_id": page["messages"][0]["id"], "stance": 1})
            assert ack.status_code == 200
            assert c.get("/rumours/storyX/claim-9/result").json()["revision"] == 1


class TestPostAnnotation:
    def test_first_seed_colours_every_message(self, client):
        body = client.post("/rumours/beta/annotations",
                           json={"message_id": "beta-m0000", "stance": 1}).json()
        assert body["revision"] == 1
        result = client.get("/rumours/beta/result").json()
        assert set(result["assignments"].values()) == {1}

    def test_metrics_vs_gold_reported(self, client):
        body = client.post("/rumours/alpha/annotations",
                           json={"message_id": "alpha-m0000", "stance": 1}).json()
        body = client.post("/rumours/alpha/annotations",
                           json={"message_id": "alpha-m0001", "stance": -1}).json()
        metrics = body["metrics_vs_gold"]
        assert metrics is not None
        assert 0.0 <= metrics["accuracy"] <= 1.0
        assert metrics["evaluated"] == 23

    def test_reannotating_same_message_bumps_revision_same_result(self, client):
        first = client.post("/rumours/alpha/annotations",
                            json={"message_id": "alpha-m0000", "stance": 1}).json()
        second = client.post("/rumours/alpha/annotations",
                             json={"message_id": "alpha-m0000", "stance": 1}).json()
        assert second["revision"] == first["revision"] + 1
        a = client.get("/rumours/alpha/result", params={"revision": first["revision"]}).json()
        b = client.get("/rumours/alpha/result", params={"revision": second["revision"]}).json()
        assert a["assignments"] == b["assignments"]

    def test_bad_stance_is_422(self, client):
        r = client.post("/rumours/alpha/annotations",
                        json={"message_id": "alpha-m0000", "stance": 5})
        assert r.status_code == 422

    def test_unknown_message_404(self, client):
        r = client.post("/rumours/alpha/annotations",
                        json={"message_id": "ghost", "stance": 1})
        assert r.status_code == 404

    def test_stale_conflicting_write_is_409(self, client):
        client.post("/rumours/alpha/annotations",
                    json={"message_id": "alpha-m0000", "stance": 1})
        client.post("/rumours/alpha/annotations",
                    json={"message_id": "alpha-m0000", "stance": -1})
        r = client.post("/rumours/alpha/annotations",
                        json={"message_id": "alpha-m0000", "stance": 0,
                              "expected_revision": 1})
        assert r.status_code == 409
        detail = r.json()["detail"]
        assert "retry" in detail["message"]

    def test_stale_but_idempotent_write_is_accepted(self, client):
        client.post("/rumours/alpha/annotations",
                    json={"message_id": "alpha-m0000", "stance": 1})
        client.post("/rumours/alpha/annotations",
                    json={"message_id": "alpha-m0001", "stance": -1})
        # stale revision but same value as current: last-writer-wins applies
        r = client.post("/rumours/alpha/annotations",
                        json={"message_id": "alpha-m0000", "stance": 1,
                              "expected_revision": 1})
        assert r.status_code == 200

    def test_read_your_writes(self, client):
        body = client.post("/rumours/alpha/annotations",
                           json={"message_id": "alpha-m0002", "stance": 0}).json()
        result = client.get("/rumours/alpha/result").json()
        assert result["revision"] >= body["revision"]


class TestResultSnapshots:
    def test_revision_zero_has_no_predictions(self, client):
        result = client.get("/rumours/alpha/result", params={"revision": 0}).json()
        assert result["assignments"] == {}
        assert result["annotated_count"] == 0

    def test_snapshots_stay_retrievable(self, client):
        revisions = []
        for i, stance in [(0, 1), (1, -1), (2, 0)]:
            body = client.post("/rumours/alpha/annotations",
                               json={"message_id": f"alpha-m{i:04d}", "stance": stance}).json()
            revisions.append(body["revision"])
        for rev in revisions:
            snap = client.get("/rumours/alpha/result", params={"revision": rev}).json()
            assert snap["revision"] == rev

    def test_unknown_revision_404(self, client):
        assert client.get("/rumours/alpha/result", params={"revision": 99}).status_code == 404

    def test_class_counts_sum_to_message_count(self, client):
        client.post("/rumours/alpha/annotations",
                    json={"message_id": "alpha-m0000", "stance": 1})
        result = client.get("/rumours/alpha/result").json()
        assert sum(result["class_counts"].values()) == 25


class TestParityWithDirectPipeline:
    def test_service_propagation_matches_classifier_exactly(self, client, demo_map):
        seeds = {"alpha-m0000": 1, "alpha-m0001": -1, "alpha-m0002": 0}
        for mid, stance in seeds.items():
            client.post("/rumours/alpha/annotations",
                        json={"message_id": mid, "stance": stance})
        result = client.get("/rumours/alpha/result").json()

        rumour = next(r for r in build_rumours() if r.rumour_id == "alpha")
        direct = RumourClassifier(rumour, PipelineSettings(), demo_map).classify(seeds)
        expected = {m.id: int(direct.classes[i]) for i, m in enumerate(direct.messages)}
        assert result["assignments"] == expected

        page = client.get("/rumours/alpha/messages", params={"limit": 25}).json()
        probs = np.array([m["probs"] for m in page["messages"]])
        direct_probs = direct.distribution.probs.copy()
        empty = ~(direct_probs > 0).any(axis=1)
        direct_probs[empty] = 1 / 3
        assert np.array_equal(probs, direct_probs)


class TestPersistence:
    def test_annotation_log_replayed_on_restart(self, tmp_path, demo_map):
        log_dir = tmp_path / "log"
        app = create_app(build_rumours(), PipelineSettings(), cluster_map=demo_map,
                         log_dir=log_dir)
        with TestClient(app) as c:
            c.post("/rumours/alpha/annotations",
                   json={"message_id": "alpha-m0000", "stance": 1})
            c.post("/rumours/alpha/annotations",
                   json={"message_id": "alpha-m0001", "stance": -1})
            before = c.get("/rumours/alpha/result").json()

        reborn = create_app(build_rumours(), PipelineSettings(), cluster_map=demo_map,
                            log_dir=log_dir)
        with TestClient(reborn) as c:
            after = c.get("/rumours/alpha/result").json()
            assert after["revision"] == 2
            assert after["assignments"] == before["assignments"]
            assert after["annotated_count"] == 2
