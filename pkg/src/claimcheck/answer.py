"""Verdict generation: prompt rendering, answer parsing, citations.

The model is asked for a three-part answer (conclusion, analysis,
references) with a conclusion drawn from a closed label set, in English
or Chinese. Parsing never raises: a malformed completion produces an
invalid verdict that still carries the raw text, because downstream
consumers (the evaluation harness, the UI) want to see what came back.
"""

from __future__ import annotations

import datetime
import hashlib
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import ConfigError, ValidationError
from .gateway import ChatRequest, Gateway


class Label(str, Enum):
    """The closed verdict label set."""

    RUMOR = "Rumor"
    NOT_RUMOR = "Not rumor"
    NOT_HEALTH_RELATED = "Not related to health information"


class PromptKind(Enum):
    WITH_REFERENCES = "with_references"
    WITHOUT_REFERENCES = "without_references"


@dataclass(frozen=True)
class ReferenceChunk:
    """What the answer prompt needs to know about one retrieved chunk."""

    doc_id: str
    chunk_index: int
    text: str
    title: str
    source_name: str
    url: str | None = None
    published_date: datetime.date | None = None


@dataclass(frozen=True)
class Reference:
    """A citation the verdict actually used, keyed by its inline number."""

    number: int
    title: str
    source_name: str
    url: str | None = None
    published_date: datetime.date | None = None

    def as_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "source_name": self.source_name,
            "url": self.url,
            "published_date": (
                self.published_date.isoformat() if self.published_date else None
            ),
        }


@dataclass
class Verdict:
    """A parsed model answer. ``valid`` means the label was recognized
    and the analysis section is non-empty; everything else is advisory."""

    label: Label | None
    analysis: str
    references: list[Reference]
    valid: bool
    raw_completion: str
    citations: tuple[int, ...] = ()
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "label": self.label.value if self.label else None,
            "valid": self.valid,
            "analysis": self.analysis,
            "references": [r.as_dict() for r in self.references],
            "citations": list(self.citations),
            "warnings": list(self.warnings),
            "raw_completion": self.raw_completion,
        }


_WITH_MARKER = "[Rumor Detection Task with References]"
_WITHOUT_MARKER = "[Rumor Detection Task]"

_TEMPLATE_FILES = {
    PromptKind.WITH_REFERENCES: "with_references.txt",
    PromptKind.WITHOUT_REFERENCES: "without_references.txt",
}


def _read_template(name: str, directory: str | Path | None) -> str:
    if directory is not None:
        return (Path(directory) / name).read_text(encoding="utf-8")
    ref = resources.files("claimcheck").joinpath("data/prompts/" + name)
    return ref.read_text(encoding="utf-8")


@dataclass(frozen=True)
class PromptTemplates:
    """The two answer templates plus their content checksums.

    Templates are plain text files so they can be reviewed and edited
    without touching code; loading validates the structural invariants
    (task markers and placeholder slots) that the pipeline depends on.
    """

    with_references: str
    without_references: str
    checksums: dict[str, str]

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "PromptTemplates":
        texts = {}
        checksums = {}
        for kind, name in _TEMPLATE_FILES.items():
            text = _read_template(name, directory)
            texts[kind] = text
            checksums[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()

        with_text = texts[PromptKind.WITH_REFERENCES]
        without_text = texts[PromptKind.WITHOUT_REFERENCES]
        if _WITH_MARKER not in with_text:
            raise ConfigError("with_references template lost its task marker")
        if _WITHOUT_MARKER not in without_text or _WITH_MARKER in without_text:
            raise ConfigError("without_references template lost its task marker")
        for kind, text in texts.items():
            if text.count("{query}") != 1:
                raise ConfigError(
                    "%s template must contain {query} exactly once" % kind.value
                )
        if with_text.count("{references}") != 1:
            raise ConfigError(
                "with_references template must contain {references} exactly once"
            )
        if "{references}" in without_text:
            raise ConfigError(
                "without_references template must not contain {references}"
            )
        return cls(with_text, without_text, checksums)


def render_references(references: list[ReferenceChunk]) -> str:
    lines = []
    for i, ref in enumerate(references, start=1):
        lines.append("Reference [%d]: %s — %s" % (i, ref.title, ref.text))
    return "\n".join(lines)


_SLOT_RE = re.compile(r"\{(query|references)\}")


def _fill(template: str, values: dict[str, str]) -> str:
    # One pass over the template; substituted values are never rescanned,
    # so a query that itself contains "{references}" stays literal.
    return _SLOT_RE.sub(lambda m: values[m.group(1)], template)


def render_prompt(
    query: str,
    references: list[ReferenceChunk],
    kind: PromptKind,
    templates: PromptTemplates,
) -> str:
    """Fill an answer template. References are numbered 1..K in the
    order given; the with-references kind requires at least one."""
    if not query or not query.strip():
        raise ValidationError("query must not be empty")
    if kind is PromptKind.WITH_REFERENCES:
        if not references:
            raise ValidationError("with_references prompt needs references")
        return _fill(
            templates.with_references,
            {"query": query, "references": render_references(references)},
        )
    if references:
        raise ValidationError("without_references prompt must not get references")
    return _fill(templates.without_references, {"query": query})


# Conclusion labels by their normalized spelling, longest first so that
# "not rumor" can never be swallowed by a prefix match elsewhere.
_LABEL_BY_TEXT = {
    "not related to health information": Label.NOT_HEALTH_RELATED,
    "与健康信息无关": Label.NOT_HEALTH_RELATED,
    "not rumor": Label.NOT_RUMOR,
    "不是谣言": Label.NOT_RUMOR,
    "rumor": Label.RUMOR,
    "谣言": Label.RUMOR,
}

_SECTION_RE = re.compile(
    r"\[\s*conclusion\s*\]|【\s*结论\s*】"
    r"|\[\s*analysis\s*\]|【\s*分析\s*】"
    r"|\[\s*references?\s*\]|【\s*参考文献\s*】|【\s*参考\s*】",
    re.IGNORECASE,
)

_EDGE_PUNCT_RE = re.compile(r"^[\W_]+|[\W_]+$", re.UNICODE)
_CITE_RE = re.compile(r"\[(\d{1,4})\]")


def _normalize_label_text(text: str) -> str:
    collapsed = re.sub(r"\s+", " ", unicodedata.normalize("NFKC", text)).strip()
    # Strip punctuation from the edges only; CJK characters are word
    # characters, so labels themselves survive untouched.
    return _EDGE_PUNCT_RE.sub("", collapsed).lower()


def match_label(text: str) -> Label | None:
    """Exact match against the closed label set, either language."""
    return _LABEL_BY_TEXT.get(_normalize_label_text(text))


def _section_name(marker: str) -> str:
    m = marker.lower()
    if "conclusion" in m or "结论" in m:
        return "conclusion"
    if "analysis" in m or "分析" in m:
        return "analysis"
    return "references"


def _split_sections(completion: str) -> dict[str, str]:
    sections: dict[str, str] = {}
    matches = list(_SECTION_RE.finditer(completion))
    for i, m in enumerate(matches):
        name = _section_name(m.group(0))
        end = matches[i + 1].start() if i + 1 < len(matches) else len(completion)
        part = completion[m.end():end]
        sections[name] = sections.get(name, "") + part
    return sections


def parse_answer(completion: str) -> Verdict:
    """Parse a model completion into a Verdict. Never raises.

    ``valid`` requires a recognized conclusion label and a non-empty
    analysis section; citation markers like [2] are collected from the
    analysis for reference resolution.
    """
    verdict = Verdict(
        label=None,
        analysis="",
        references=[],
        valid=False,
        raw_completion=completion if isinstance(completion, str) else "",
    )
    if not isinstance(completion, str) or not completion.strip():
        verdict.warnings.append("empty completion")
        return verdict

    sections = _split_sections(completion)
    if "conclusion" not in sections:
        verdict.warnings.append("missing conclusion section")
    else:
        conclusion = sections["conclusion"].strip()
        verdict.label = match_label(conclusion)
        if verdict.label is None:
            verdict.warnings.append(
                "conclusion %r is not one of the allowed labels" % conclusion[:80]
            )
    analysis = sections.get("analysis", "").strip()
    if not analysis:
        verdict.warnings.append("missing or empty analysis section")
    verdict.analysis = analysis
    verdict.citations = tuple(
        sorted({int(number) for number in _CITE_RE.findall(analysis)})
    )
    verdict.valid = verdict.label is not None and bool(analysis)
    return verdict


def attach_references(
    verdict: Verdict, references_used: list[ReferenceChunk]
) -> Verdict:
    """Resolve the verdict's citation markers against the prompt's
    reference list.

    Only cited references are attached. Citations pointing at the same
    document collapse into one entry under the lowest number; markers
    outside 1..K are removed from the analysis with a warning each.
    """
    k = len(references_used)
    out_of_range = sorted(n for n in verdict.citations if not 1 <= n <= k)
    in_range = sorted(n for n in verdict.citations if 1 <= n <= k)
    if out_of_range:
        keep = set(in_range)

        def _strip(m: re.Match) -> str:
            return m.group(0) if int(m.group(1)) in keep else ""

        verdict.analysis = _CITE_RE.sub(_strip, verdict.analysis)
        for number in out_of_range:
            verdict.warnings.append(
                "citation [%d] has no matching reference; removed" % number
            )
        verdict.citations = tuple(in_range)

    entries: list[Reference] = []
    seen_docs: set[str] = set()
    for number in in_range:
        ref = references_used[number - 1]
        if ref.doc_id in seen_docs:
            continue
        seen_docs.add(ref.doc_id)
        entries.append(
            Reference(
                number=number,
                title=ref.title,
                source_name=ref.source_name,
                url=ref.url,
                published_date=ref.published_date,
            )
        )
    verdict.references = entries
    return verdict


class AnswerEngine:
    """Renders the prompt, calls the answerer role, parses the verdict."""

    def __init__(
        self,
        gateway: Gateway,
        templates: PromptTemplates | None = None,
        temperature: float = 0.0,
        max_output_tokens: int = 2048,
    ) -> None:
        self._gateway = gateway
        self.templates = templates or PromptTemplates.load()
        self._temperature = temperature
        self._max_output_tokens = max_output_tokens

    def answer(
        self, query: str, references: list[ReferenceChunk], kind: PromptKind
    ) -> Verdict:
        prompt = render_prompt(query, references, kind, self.templates)
        completion = self._gateway.chat(
            ChatRequest.single(
                "answerer",
                prompt,
                max_output_tokens=self._max_output_tokens,
                temperature=self._temperature,
            )
        )
        verdict = parse_answer(completion)
        attach_references(
            verdict, references if kind is PromptKind.WITH_REFERENCES else []
        )
        return verdict
