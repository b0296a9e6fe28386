"""The detection pipeline end to end, and runtime persistence."""

from __future__ import annotations

import json

import pytest

from claimcheck.answer import Label
from claimcheck.errors import GatewayError, ValidationError
from claimcheck.service import VECTOR_SNAPSHOT_NAME

RUMOR_REPLY = "[Conclusion] Rumor\n[Analysis] The evidence in [1] contradicts it."
PLAIN_REPLY = "[Conclusion] Not rumor\n[Analysis] Consistent with the research."


def strip_timings(payload: dict) -> dict:
    trimmed = dict(payload)
    trimmed.pop("timings_ms")
    return trimmed


def first_body(fixture_records) -> str:
    return fixture_records[0]["body"]


class TestDetector:
    def test_cited_path(self, runtime_factory, fixture_jsonl, fixture_records):
        rt = runtime_factory()
        rt.ingest_text(fixture_jsonl)
        # a hypothesis identical to a stored chunk pins its similarity at 1
        rt.gateway.script("hypothesis", first_body(fixture_records))
        rt.gateway.script("answerer", RUMOR_REPLY)
        # "000" appears in exactly one document, so keyword recall must
        # surface it no matter what the vector path contributes
        result = rt.detector.detect("case file 000, vitamin c and colds")
        assert result.used_references is True
        assert result.verdict.valid and result.verdict.label is Label.RUMOR
        assert result.verdict.citations == (1,)
        assert result.verdict.references[0].title.startswith("Fact check 000")
        assert result.degraded == []

    def test_fallback_on_empty_corpus(self, runtime_factory):
        rt = runtime_factory()
        rt.gateway.script("answerer", PLAIN_REPLY)
        result = rt.detector.detect("is the moon made of cheese?")
        assert result.used_references is False
        assert result.verdict.valid
        # no candidates: the hypothesis stage never runs
        roles = [r.role for r in rt.gateway.chat_calls]
        assert roles == ["answerer"]
        assert result.timings.hypothesis_ms == 0.0

    def test_fallback_when_rerank_filters_everything(
        self, runtime_factory, fixture_jsonl
    ):
        rt = runtime_factory()
        rt.ingest_text(fixture_jsonl)
        rt.gateway.script("answerer", PLAIN_REPLY)
        # hash embeddings of unrelated texts sit near zero similarity,
        # far below the 0.5 default threshold
        result = rt.detector.detect("garlic lowers blood pressure, true?")
        assert result.used_references is False
        roles = [r.role for r in rt.gateway.chat_calls]
        assert roles == ["hypothesis", "answerer"]

    def test_threshold_override_opens_the_gate(
        self, runtime_factory, fixture_jsonl
    ):
        rt = runtime_factory()
        rt.ingest_text(fixture_jsonl)
        rt.gateway.script("answerer", RUMOR_REPLY)
        result = rt.detector.detect(
            "garlic lowers blood pressure, true?",
            overrides={"similarity_threshold": -1.0},
        )
        assert result.used_references is True

    def test_top_k_bounds_reference_count(self, runtime_factory, fixture_jsonl):
        rt = runtime_factory()
        rt.ingest_text(fixture_jsonl)
        rt.detector.detect(
            "garlic lowers blood pressure, true?",
            overrides={"similarity_threshold": -1.0, "top_k": 2},
        )
        answer_prompt = rt.gateway.chat_calls[-1].messages[-1].content
        assert answer_prompt.count("Reference [") == 2

    def test_unknown_override_rejected(self, runtime_factory):
        rt = runtime_factory()
        with pytest.raises(ValidationError):
            rt.detector.detect("a claim", overrides={"bogus_knob": 1})

    def test_empty_query_rejected_with_code(self, runtime_factory):
        rt = runtime_factory()
        with pytest.raises(ValidationError) as err:
            rt.detector.detect("   ")
        assert err.value.code == "empty_query"

    def test_over_long_query_rejected_with_code(self, runtime_factory):
        rt = runtime_factory()
        with pytest.raises(ValidationError) as err:
            rt.detector.detect("word " * 4001)
        assert err.value.code == "query_too_long"

    def test_embedding_outage_degrades_but_answers(
        self, runtime_factory, fixture_jsonl
    ):
        rt = runtime_factory()
        rt.ingest_text(fixture_jsonl)
        rt.gateway.fail_embed = GatewayError("embeddings down")
        rt.gateway.script("answerer", PLAIN_REPLY)
        result = rt.detector.detect("garlic lowers blood pressure, true?")
        assert result.used_references is False
        assert result.verdict.valid
        assert any("keyword matches only" in note for note in result.degraded)
        assert any("re-ranking unavailable" in note for note in result.degraded)

    def test_answerer_failure_propagates(self, runtime_factory):
        rt = runtime_factory()
        rt.gateway.fail_chat["answerer"] = GatewayError("model down")
        with pytest.raises(GatewayError):
            rt.detector.detect("any claim")

    def test_timings_populated(self, runtime_factory, fixture_jsonl):
        rt = runtime_factory()
        rt.ingest_text(fixture_jsonl)
        result = rt.detector.detect("garlic lowers blood pressure, true?")
        t = result.timings.as_dict()
        assert set(t) == {
            "recall_ms",
            "hypothesis_ms",
            "rerank_ms",
            "generation_ms",
        }
        assert all(v >= 0.0 for v in t.values())
        assert t["generation_ms"] > 0.0

    def test_detect_deterministic_apart_from_timings(
        self, runtime_factory, fixture_jsonl
    ):
        rt = runtime_factory()
        rt.ingest_text(fixture_jsonl)
        rt.gateway.respond_with("answerer", lambda req: RUMOR_REPLY)
        payloads = [
            json.dumps(
                strip_timings(
                    rt.detector.detect(
                        "garlic lowers blood pressure, true?",
                        overrides={"similarity_threshold": -1.0},
                    ).as_dict()
                ),
                sort_keys=True,
            )
            for _ in range(3)
        ]
        assert len(set(payloads)) == 1


class TestRuntime:
    def test_offline_defaults_work(self, runtime_factory):
        rt = runtime_factory()
        assert rt.gateway.dimension == 64
        result = rt.detector.detect("standalone claim with no corpus")
        assert result.verdict.raw_completion

    def test_ingest_reports_rejects(self, runtime_factory):
        rt = runtime_factory()
        good = json.dumps({"title": "t", "body": "b", "source_name": "s"})
        summary = rt.ingest_text(good + "\nnot json\n")
        assert summary.inserted == 1
        assert [line for line, _ in summary.rejected] == [2]

    def test_ingest_writes_vector_snapshot(self, runtime_factory, tmp_path):
        rt = runtime_factory()
        rt.ingest_text(
            json.dumps({"title": "t", "body": "b", "source_name": "s"})
        )
        snapshot = tmp_path / "data" / VECTOR_SNAPSHOT_NAME
        assert snapshot.is_file()
        assert len(rt.vectors) == rt.corpus.chunk_count == 1

    def test_restart_restores_state(
        self, runtime_factory, fixture_jsonl
    ):
        rt1 = runtime_factory()
        rt1.ingest_text(fixture_jsonl)
        rt1.gateway.respond_with("answerer", lambda req: RUMOR_REPLY)
        before = strip_timings(
            rt1.detector.detect(
                "garlic lowers blood pressure, true?",
                overrides={"similarity_threshold": -1.0},
            ).as_dict()
        )

        rt2 = runtime_factory()  # same data directory
        assert rt2.corpus.doc_count == rt1.corpus.doc_count
        assert len(rt2.vectors) == len(rt1.vectors)
        assert len(rt2.keywords) == rt2.corpus.doc_count
        rt2.gateway.respond_with("answerer", lambda req: RUMOR_REPLY)
        after = strip_timings(
            rt2.detector.detect(
                "garlic lowers blood pressure, true?",
                overrides={"similarity_threshold": -1.0},
            ).as_dict()
        )
        assert after == before

    def test_restart_vectors_bit_identical(self, runtime_factory, fixture_jsonl):
        rt1 = runtime_factory()
        rt1.ingest_text(fixture_jsonl)
        rt2 = runtime_factory()
        original = rt1.vectors.stored_vectors()
        restored = rt2.vectors.stored_vectors()
        assert [k for k, _ in original] == [k for k, _ in restored]
        for (_, a), (_, b) in zip(original, restored):
            assert a.tobytes() == b.tobytes()

    def test_reindex_rebuilds_missing_vectors(
        self, runtime_factory, fixture_jsonl, tmp_path
    ):
        rt1 = runtime_factory()
        rt1.ingest_text(fixture_jsonl)
        (tmp_path / "data" / VECTOR_SNAPSHOT_NAME).unlink()

        rt2 = runtime_factory()
        assert rt2.corpus.chunk_count > 0
        assert len(rt2.vectors) == 0  # snapshot gone, corpus intact
        embedded = rt2.reindex_vectors()
        assert embedded == rt2.corpus.chunk_count
        assert len(rt2.vectors) == rt2.corpus.chunk_count
        # the retriever sees the rebuilt index
        result = rt2.detector.detect(
            "garlic lowers blood pressure, true?",
            overrides={"similarity_threshold": -1.0},
        )
        assert result.used_references is True
