"""HTTP surface: schemas, typed errors, ingestion, and health."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from claimcheck.api import create_app
from claimcheck.errors import GatewayError


@pytest.fixture()
def client(runtime_factory, fixture_jsonl):
    rt = runtime_factory()
    rt.ingest_text(fixture_jsonl)
    app = create_app(rt)
    with TestClient(app, raise_server_exceptions=False) as c:
        c.runtime = rt
        yield c


def error_shape(payload: dict) -> bool:
    return set(payload) == {"code", "message", "detail"}


class TestDetectEndpoint:
    def test_response_schema(self, client):
        resp = client.post("/v1/detect", json={"claim": "garlic lowers pressure?"})
        assert resp.status_code == 200
        body = resp.json()
        assert set(body) == {"verdict", "used_references", "timings_ms", "degraded"}
        verdict = body["verdict"]
        assert set(verdict) == {
            "label",
            "valid",
            "analysis",
            "references",
            "citations",
            "warnings",
            "raw_completion",
        }
        assert isinstance(body["used_references"], bool)
        assert isinstance(body["degraded"], list)
        timings = body["timings_ms"]
        assert set(timings) == {
            "recall_ms",
            "hypothesis_ms",
            "rerank_ms",
            "generation_ms",
        }
        assert all(isinstance(v, float) for v in timings.values())
        assert isinstance(verdict["valid"], bool)
        assert isinstance(verdict["references"], list)
        assert isinstance(verdict["raw_completion"], str)

    def test_config_overrides_change_behavior(self, client):
        resp = client.post(
            "/v1/detect",
            json={
                "claim": "garlic lowers blood pressure?",
                "config": {"similarity_threshold": -1.0, "top_k": 3},
            },
        )
        assert resp.status_code == 200
        assert resp.json()["used_references"] is True

    def test_invalid_verdict_passes_through_raw(self, client):
        client.runtime.gateway.script("answerer", "free-form rambling, no format")
        resp = client.post("/v1/detect", json={"claim": "some odd claim"})
        body = resp.json()
        assert body["verdict"]["valid"] is False
        assert body["verdict"]["raw_completion"] == "free-form rambling, no format"
        assert body["verdict"]["warnings"]

    def test_empty_claim_is_400_with_code(self, client):
        resp = client.post("/v1/detect", json={"claim": "   "})
        assert resp.status_code == 400
        body = resp.json()
        assert error_shape(body)
        assert body["code"] == "empty_query"

    def test_missing_claim_field(self, client):
        resp = client.post("/v1/detect", json={})
        assert resp.status_code == 400
        body = resp.json()
        assert error_shape(body) and body["code"] == "invalid_request"
        assert body["detail"] and "loc" in body["detail"][0]

    def test_unknown_body_field_rejected(self, client):
        resp = client.post(
            "/v1/detect", json={"claim": "x", "unexpected": True}
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_request"

    def test_unknown_config_field_rejected(self, client):
        resp = client.post(
            "/v1/detect", json={"claim": "x", "config": {"topk": 1}}
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_request"

    def test_out_of_range_config_rejected(self, client):
        for config in (
            {"top_k": 0},
            {"similarity_threshold": 2.0},
            {"n_vector_chunks": -5},
        ):
            resp = client.post(
                "/v1/detect", json={"claim": "x", "config": config}
            )
            assert resp.status_code == 400
            assert resp.json()["code"] == "invalid_request"

    def test_non_json_body_rejected(self, client):
        resp = client.post(
            "/v1/detect",
            content=b"claim=plain",
            headers={"Content-Type": "application/json"},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_request"

    def test_gateway_failure_maps_to_502(self, client):
        client.runtime.gateway.fail_chat["answerer"] = GatewayError("model down")
        resp = client.post("/v1/detect", json={"claim": "anything"})
        assert resp.status_code == 502
        body = resp.json()
        assert error_shape(body)
        assert body["code"] == "upstream_error"

    def test_detect_deterministic_across_requests(self, client):
        client.runtime.gateway.respond_with(
            "answerer",
            lambda req: "[Conclusion] Rumor\n[Analysis] Based on [1].",
        )
        payloads = []
        for _ in range(3):
            resp = client.post(
                "/v1/detect",
                json={
                    "claim": "garlic lowers blood pressure?",
                    "config": {"similarity_threshold": -1.0},
                },
            )
            body = resp.json()
            body.pop("timings_ms")
            payloads.append(json.dumps(body, sort_keys=True))
        assert len(set(payloads)) == 1


class TestIngestEndpoint:
    def test_raw_jsonl_body(self, client):
        record = json.dumps(
            {"title": "new doc", "body": "fresh body", "source_name": "s"}
        )
        resp = client.post(
            "/v1/corpus/ingest",
            content=(record + "\njunk line\n").encode("utf-8"),
            headers={"Content-Type": "text/plain"},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["inserted"] == 1
        assert body["rejected"] == [{"line": 2, "reason": body["rejected"][0]["reason"]}]

    def test_ingest_by_path(self, client, tmp_path):
        path = tmp_path / "extra.jsonl"
        path.write_text(
            json.dumps({"title": "filed", "body": "from disk", "source_name": "s"})
            + "\n",
            encoding="utf-8",
        )
        resp = client.post("/v1/corpus/ingest", json={"path": str(path)})
        assert resp.status_code == 200
        assert resp.json()["inserted"] == 1

    def test_ingest_path_missing_file(self, client, tmp_path):
        resp = client.post(
            "/v1/corpus/ingest", json={"path": str(tmp_path / "absent.jsonl")}
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_request"

    def test_ingest_bad_json_payload_shape(self, client):
        for payload in ({"file": "x"}, {"path": 5}, {"path": "x", "extra": 1}, []):
            resp = client.post("/v1/corpus/ingest", json=payload)
            assert resp.status_code == 400

    def test_ingest_empty_body(self, client):
        resp = client.post(
            "/v1/corpus/ingest",
            content=b"",
            headers={"Content-Type": "text/plain"},
        )
        assert resp.status_code == 400

    def test_ingest_non_utf8(self, client):
        resp = client.post(
            "/v1/corpus/ingest",
            content=b"\xff\xfe\x00bad",
            headers={"Content-Type": "text/plain"},
        )
        assert resp.status_code == 400

    def test_duplicates_skipped_on_reingest(self, client, fixture_jsonl):
        resp = client.post(
            "/v1/corpus/ingest",
            content=fixture_jsonl.encode("utf-8"),
            headers={"Content-Type": "text/plain"},
        )
        body = resp.json()
        assert body["inserted"] == 0
        assert body["skipped"] == 50


class TestStatsAndHealth:
    def test_stats_counts(self, client):
        resp = client.get("/v1/corpus/stats")
        assert resp.status_code == 200
        body = resp.json()
        rt = client.runtime
        assert body["documents"] == rt.corpus.doc_count == 50
        assert body["chunks"] == rt.corpus.chunk_count
        assert body["vector_entries"] == len(rt.vectors)
        assert body["embedding_dimension"] == 64
        assert body["kernel_backend"] in ("native", "pure")

    def test_stats_track_ingestion(self, client):
        before = client.get("/v1/corpus/stats").json()
        client.post(
            "/v1/corpus/ingest",
            content=json.dumps(
                {"title": "one more", "body": "body text", "source_name": "s"}
            ).encode("utf-8"),
            headers={"Content-Type": "text/plain"},
        )
        after = client.get("/v1/corpus/stats").json()
        assert after["documents"] == before["documents"] + 1

    def test_healthz(self, client):
        resp = client.get("/healthz")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert set(body["prompt_checksums"]) == {
            "with_references.txt",
            "without_references.txt",
        }
        assert body["documents"] == 50
