"""Shared fixtures: deterministic corpora, gateways, and runtimes."""

from __future__ import annotations

import dataclasses
import json
import random

import pytest

from claimcheck.config import AppConfig, GatewayConfig, PathsConfig
from claimcheck.retrieval import RetrievalConfig
from claimcheck.corpus import make_document
from claimcheck.gateway import MockGateway
from claimcheck.service import Runtime

_TOPICS = [
    ("vitamin c", "维生素C", "colds"),
    ("garlic", "大蒜", "blood pressure"),
    ("vaccines", "疫苗", "immunity"),
    ("microwaves", "微波炉", "nutrient loss"),
    ("alkaline water", "碱性水", "cancer"),
    ("detox tea", "排毒茶", "liver"),
    ("sugar", "糖", "hyperactivity"),
    ("eggs", "鸡蛋", "cholesterol"),
    ("wifi", "无线网络", "sleep"),
    ("juice cleanse", "果汁断食", "toxins"),
]

_EN_SENTENCES = [
    "A widely shared post claims that {en} can cure {sub} overnight.",
    "Researchers reviewed the evidence on {en} and found no such effect.",
    "Clinical trials measuring {sub} outcomes showed no benefit from {en}.",
    "Health authorities advise against relying on {en} for {sub}.",
    "The claim about {en} originated from a misread laboratory study.",
]

_ZH_SENTENCES = [
    "网上流传{zh}可以治疗相关疾病的说法。",
    "多项研究并未发现{zh}有这样的效果。",
    "专家提醒公众不要轻信关于{zh}的传言。",
    "监管机构已经对{zh}的宣传内容进行了澄清。",
]


def build_fixture_records(count: int = 50) -> list[dict]:
    """Deterministic bilingual corpus records for end-to-end tests."""
    rng = random.Random(20240817)
    records = []
    for i in range(count):
        en, zh, sub = _TOPICS[i % len(_TOPICS)]
        parts = []
        for template in rng.sample(_EN_SENTENCES, 3):
            parts.append(template.format(en=en, sub=sub))
        for template in rng.sample(_ZH_SENTENCES, 2):
            parts.append(template.format(zh=zh))
        body = " ".join(parts) + f" Case file {i:03d}."
        records.append(
            {
                "title": f"Fact check {i:03d}: {en} and {sub}",
                "body": body,
                "source_name": "fixture-desk",
                "published_date": "2024-01-15",
                "url": f"https://example.org/fact/{i:03d}",
            }
        )
    return records


@pytest.fixture()
def fixture_records() -> list[dict]:
    return build_fixture_records()


@pytest.fixture()
def fixture_jsonl(fixture_records) -> str:
    return "\n".join(json.dumps(r, ensure_ascii=False) for r in fixture_records)


@pytest.fixture()
def mock_gateway() -> MockGateway:
    return MockGateway()


@pytest.fixture()
def doc_factory():
    def make(title: str, body: str, **kwargs):
        kwargs.setdefault("source_name", "test-source")
        return make_document(title=title, body=body, **kwargs)

    return make


def make_runtime(tmp_path, **retrieval_overrides) -> Runtime:
    config = AppConfig(
        gateway=GatewayConfig(type="mock", dimension=64),
        retrieval=dataclasses.replace(RetrievalConfig(), **retrieval_overrides),
        paths=PathsConfig(data_dir=str(tmp_path / "data")),
    )
    return Runtime(config)


@pytest.fixture()
def runtime_factory(tmp_path):
    def factory(**retrieval_overrides) -> Runtime:
        return make_runtime(tmp_path, **retrieval_overrides)

    return factory
