"""Evaluation harness: label metrics, model-graded scores, batch runs.

Two measurement families live here. Label metrics (validity rate,
accuracy, per-class and macro F1) are computed mechanically from gold
and predicted labels; accuracy and F1 consider only records whose
response parsed as valid, while the validity rate reports how many did.
Model-graded metrics (relevance, reliability, richness) send each
response back through a judge role and average whatever scores parse;
responses the judge can't score are excluded from the mean but counted,
so n_scored + n_excluded always reconciles with the record count.
"""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .answer import Label, match_label
from .errors import DatasetFormatError, GatewayError, ValidationError
from .gateway import ChatRequest, Gateway
from .service import DetectResult, Detector

logger = logging.getLogger(__name__)

JUDGE_METRICS = ("relevance", "reliability", "richness")
_METRIC_TITLES = {
    "relevance": "Relevance",
    "reliability": "Reliability",
    "richness": "Richness",
}

SWEEP_THRESHOLDS = (0.1, 0.3, 0.5, 0.7, 0.9)

_SLOT_RE = re.compile(r"\{([a-z_]+)\}")


def _fill_slots(template: str, values: dict[str, str]) -> str:
    # Single pass over the template; substituted values are not rescanned,
    # so model output containing "{query}" or similar stays literal.
    return _SLOT_RE.sub(
        lambda m: values.get(m.group(1), m.group(0)), template
    )


# -- label metrics ----------------------------------------------------------


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class LabelScores:
    """Aggregate label metrics for one evaluation run."""

    n_total: int
    n_valid: int
    valid_answer_rate: float
    accuracy: float
    per_class: dict[str, ClassScores]
    f1_macro: float


def score_labels(
    pairs: Sequence[tuple[Label, Label | None]]
) -> LabelScores:
    """Score (gold, predicted) label pairs; None marks an invalid answer.

    Accuracy and the F1 family are computed over valid pairs only. Any
    0/0 ratio is 0 by convention. Macro F1 averages over the classes
    that appear in the valid pairs (gold or predicted side), so a class
    absent from a run neither helps nor hurts; per-class scores are
    returned so any other averaging scheme can be recomputed.
    """
    if not pairs:
        raise ValidationError("cannot score an empty set of records")
    n_total = len(pairs)
    valid = [(g, p) for g, p in pairs if p is not None]
    n_valid = len(valid)
    valid_rate = n_valid / n_total
    accuracy = (
        sum(1 for g, p in valid if g == p) / n_valid if n_valid else 0.0
    )

    classes = sorted(
        {g for g, _ in valid} | {p for _, p in valid},
        key=lambda label: label.value,
    )
    per_class: dict[str, ClassScores] = {}
    f1_values: list[float] = []
    for cls in classes:
        tp = sum(1 for g, p in valid if g == cls and p == cls)
        fp = sum(1 for g, p in valid if g != cls and p == cls)
        fn = sum(1 for g, p in valid if g == cls and p != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        per_class[cls.value] = ClassScores(precision, recall, f1)
        f1_values.append(f1)
    f1_macro = sum(f1_values) / len(f1_values) if f1_values else 0.0
    return LabelScores(n_total, n_valid, valid_rate, accuracy, per_class, f1_macro)


# -- judge ------------------------------------------------------------------


def parse_judge_score(completion: str, metric: str) -> tuple[int | None, bool]:
    """Extract the integer score for ``metric`` from a judge completion.

    Tolerates prose around the JSON and minor quoting variations; the
    score is clamped into [0, 10]. Returns (score, clamped) or
    (None, False) when nothing parseable is present.
    """
    title = _METRIC_TITLES.get(metric, metric.capitalize())
    pattern = re.compile(
        r'"?%s\s+Score"?\s*[:：]\s*"?\s*(-?\d+(?:\.\d+)?)\s*"?' % re.escape(title),
        re.IGNORECASE,
    )
    m = pattern.search(completion or "")
    if m is None:
        return None, False
    value = float(m.group(1))
    clamped = False
    if value < 0.0:
        value, clamped = 0.0, True
    elif value > 10.0:
        value, clamped = 10.0, True
    return int(round(value)), clamped


@dataclass
class JudgeOutcome:
    metric: str
    score: int | None
    clamped: bool = False
    attempts: int = 0


def _load_judge_templates(directory: str | Path | None) -> dict[str, str]:
    templates = {}
    for metric in JUDGE_METRICS:
        name = "judge_%s.txt" % metric
        if directory is not None:
            text = (Path(directory) / name).read_text(encoding="utf-8")
        else:
            text = (
                resources.files("claimcheck")
                .joinpath("data/prompts/" + name)
                .read_text(encoding="utf-8")
            )
        templates[metric] = text
    return templates


class Judge:
    """Scores responses 0-10 on each metric through the judge role."""

    def __init__(
        self,
        gateway: Gateway,
        templates_dir: str | Path | None = None,
        identity: str = "mock",
        temperature: float = 0.0,
    ) -> None:
        self._gateway = gateway
        self._templates = _load_judge_templates(templates_dir)
        self.identity = identity
        self._temperature = temperature

    def score(self, input_text: str, response_text: str, metric: str) -> JudgeOutcome:
        """One metric for one response; retries a malformed reply once.

        A response the judge cannot score (two malformed replies, gateway
        failure, or no text to grade) comes back with score None and is
        excluded from averages rather than defaulted.
        """
        if metric not in JUDGE_METRICS:
            raise ValidationError("unknown judge metric: %s" % metric)
        outcome = JudgeOutcome(metric=metric, score=None)
        if not response_text or not response_text.strip():
            return outcome
        prompt = _fill_slots(
            self._templates[metric],
            {"query": input_text, "response": response_text},
        )
        for _ in range(2):
            outcome.attempts += 1
            try:
                completion = self._gateway.chat(
                    ChatRequest.single(
                        "judge", prompt, temperature=self._temperature
                    )
                )
            except GatewayError as exc:
                logger.warning("judge call failed (%s): %s", metric, exc.message)
                continue
            score, clamped = parse_judge_score(completion, metric)
            if score is not None:
                outcome.score = score
                outcome.clamped = clamped
                if clamped:
                    logger.warning(
                        "judge %s score out of range; clamped to %d", metric, score
                    )
                return outcome
        return outcome


# -- datasets ---------------------------------------------------------------


@dataclass(frozen=True)
class EvalRecord:
    record_id: str
    input_text: str
    gold_label: Label


def load_dataset(path: str | Path) -> list[EvalRecord]:
    """Read an evaluation dataset (JSONL with id, input_text, gold_label).

    Unlike corpus ingestion, dataset problems are fatal: a benchmark with
    silently dropped records measures something other than what it
    claims. All bad line numbers are reported at once.
    """
    p = Path(path)
    if not p.is_file():
        raise ValidationError("dataset file not found: %s" % p)
    records: list[EvalRecord] = []
    problems: list[tuple[int, str]] = []
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as exc:
                problems.append((lineno, "invalid JSON: %s" % exc.msg))
                continue
            if not isinstance(raw, dict):
                problems.append((lineno, "record is not a JSON object"))
                continue
            missing = [k for k in ("id", "input_text", "gold_label") if k not in raw]
            if missing:
                problems.append((lineno, "missing keys: %s" % ", ".join(missing)))
                continue
            input_text = raw["input_text"]
            if not isinstance(input_text, str) or not input_text.strip():
                problems.append((lineno, "input_text must be a non-empty string"))
                continue
            gold = raw["gold_label"]
            label = match_label(gold) if isinstance(gold, str) else None
            if label is None:
                problems.append((lineno, "gold_label %r is not a known label" % gold))
                continue
            records.append(EvalRecord(str(raw["id"]), input_text, label))
    if problems:
        raise DatasetFormatError(
            "dataset %s has %d bad line(s): %s"
            % (
                p,
                len(problems),
                "; ".join("line %d: %s" % (n, why) for n, why in problems[:10]),
            ),
            lines=[n for n, _ in problems],
        )
    return records


# -- batch evaluation --------------------------------------------------------


@dataclass
class EvalRow:
    record_id: str
    gold: str
    predicted: str | None
    valid: bool
    used_references: bool
    error: str | None = None
    judge_scores: dict[str, int | None] = field(default_factory=dict)


@dataclass
class JudgeSummary:
    mean: float | None
    n_scored: int
    n_excluded: int
    n_clamped: int


@dataclass
class EvalReport:
    """Everything one evaluation run measured, with per-record rows."""

    n_total: int
    scores: LabelScores
    judge: dict[str, JudgeSummary]
    judge_identity: str | None
    rows: list[EvalRow]
    similarity_threshold: float

    def as_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "similarity_threshold": self.similarity_threshold,
            "valid_answer_rate": self.scores.valid_answer_rate,
            "accuracy": self.scores.accuracy,
            "f1_macro": self.scores.f1_macro,
            "f1_note": (
                "headline F1 is the macro average over classes present in "
                "the valid pairs; per-class scores allow recomputing any "
                "other scheme"
            ),
            "per_class": {
                name: {"precision": c.precision, "recall": c.recall, "f1": c.f1}
                for name, c in self.scores.per_class.items()
            },
            "judge_identity": self.judge_identity,
            "judge": {
                metric: {
                    "mean": s.mean,
                    "n_scored": s.n_scored,
                    "n_excluded": s.n_excluded,
                    "n_clamped": s.n_clamped,
                }
                for metric, s in self.judge.items()
            },
            "rows": [
                {
                    "id": r.record_id,
                    "gold": r.gold,
                    "predicted": r.predicted,
                    "valid": r.valid,
                    "used_references": r.used_references,
                    "error": r.error,
                    "judge_scores": r.judge_scores,
                }
                for r in self.rows
            ],
        }

    def table(self) -> str:
        """Fixed-column summary table, one data row."""
        headers = (
            "Avg Accuracy",
            "F1 Score",
            "Valid Answer Rate",
            "Relevance",
            "Reliability",
            "Richness",
        )
        values = [
            "%.4f" % self.scores.accuracy,
            "%.4f" % self.scores.f1_macro,
            "%.4f" % self.scores.valid_answer_rate,
        ]
        for metric in JUDGE_METRICS:
            summary = self.judge.get(metric)
            if summary is None or summary.mean is None:
                values.append("-")
            else:
                values.append("%.2f" % summary.mean)
        widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
        head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
        body = "  ".join(v.rjust(w) for v, w in zip(values, widths))
        return head + "\n" + body


def _judge_all(
    judge: Judge, records: list[EvalRecord], rows: list[EvalRow], texts: list[str]
) -> dict[str, JudgeSummary]:
    summaries: dict[str, JudgeSummary] = {}
    for metric in JUDGE_METRICS:
        scored: list[int] = []
        clamped = 0
        for record, row, text in zip(records, rows, texts):
            outcome = judge.score(record.input_text, text, metric)
            row.judge_scores[metric] = outcome.score
            if outcome.score is None:
                continue
            scored.append(outcome.score)
            if outcome.clamped:
                clamped += 1
        summaries[metric] = JudgeSummary(
            mean=sum(scored) / len(scored) if scored else None,
            n_scored=len(scored),
            n_excluded=len(records) - len(scored),
            n_clamped=clamped,
        )
    return summaries


def run_eval(
    detector: Detector,
    dataset: str | Path | list[EvalRecord],
    judge: Judge | None = None,
    parallelism: int = 4,
    overrides: dict | None = None,
) -> EvalReport:
    """Detect every dataset record and aggregate the metrics.

    Detection runs across a thread pool (results keep dataset order and
    are assembled on one thread); judge calls run sequentially so scripted
    gateways stay deterministic. A gateway failure on one record marks
    that record invalid instead of aborting the run.
    """
    if parallelism < 1:
        raise ValidationError("parallelism must be positive")
    records = dataset if isinstance(dataset, list) else load_dataset(dataset)
    if not records:
        raise ValidationError("dataset has no records")

    def worker(record: EvalRecord) -> tuple[DetectResult | None, str | None]:
        try:
            return detector.detect(record.input_text, overrides), None
        except GatewayError as exc:
            return None, exc.message

    if parallelism == 1:
        outcomes = [worker(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(worker, records))

    pairs: list[tuple[Label, Label | None]] = []
    rows: list[EvalRow] = []
    texts: list[str] = []
    for record, (result, error) in zip(records, outcomes):
        if result is not None and result.verdict.valid:
            predicted = result.verdict.label
        else:
            predicted = None
        pairs.append((record.gold_label, predicted))
        rows.append(
            EvalRow(
                record_id=record.record_id,
                gold=record.gold_label.value,
                predicted=predicted.value if predicted else None,
                valid=bool(result and result.verdict.valid),
                used_references=bool(result and result.used_references),
                error=error,
            )
        )
        texts.append(result.verdict.raw_completion if result else "")

    scores = score_labels(pairs)
    judge_summaries = (
        _judge_all(judge, records, rows, texts) if judge is not None else {}
    )
    threshold = detector.base_config.similarity_threshold
    if overrides and "similarity_threshold" in overrides:
        threshold = overrides["similarity_threshold"]
    return EvalReport(
        n_total=len(records),
        scores=scores,
        judge=judge_summaries,
        judge_identity=judge.identity if judge else None,
        rows=rows,
        similarity_threshold=threshold,
    )


def sweep_threshold(
    detector: Detector,
    dataset: str | Path | list[EvalRecord],
    thresholds: Sequence[float] = SWEEP_THRESHOLDS,
    judge: Judge | None = None,
    parallelism: int = 4,
    out_dir: str | Path | None = None,
) -> dict[float, EvalReport]:
    """Run the full evaluation once per similarity threshold.

    Writes report-<threshold>.json files plus a summary table when
    ``out_dir`` is given. Returns the reports keyed by threshold.
    """
    records = dataset if isinstance(dataset, list) else load_dataset(dataset)
    reports: dict[float, EvalReport] = {}
    for threshold in thresholds:
        overrides = {"similarity_threshold": float(threshold)}
        reports[float(threshold)] = run_eval(
            detector, records, judge=judge, parallelism=parallelism, overrides=overrides
        )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for threshold, report in reports.items():
            path = out / ("report-%s.json" % ("%.2f" % threshold).rstrip("0").rstrip("."))
            path.write_text(
                json.dumps(report.as_dict(), indent=2, ensure_ascii=False),
                encoding="utf-8",
            )
        (out / "summary.txt").write_text(sweep_table(reports), encoding="utf-8")
    return reports


def sweep_table(reports: dict[float, EvalReport]) -> str:
    """One row per threshold, same columns as the single-run table."""
    headers = (
        "Similarity Threshold",
        "Avg Accuracy",
        "F1 Score",
        "Valid Answer Rate",
        "Relevance",
        "Reliability",
        "Richness",
    )
    rows = []
    for threshold in sorted(reports):
        report = reports[threshold]
        row = [
            "%.2f" % threshold,
            "%.4f" % report.scores.accuracy,
            "%.4f" % report.scores.f1_macro,
            "%.4f" % report.scores.valid_answer_rate,
        ]
        for metric in JUDGE_METRICS:
            summary = report.judge.get(metric)
            row.append(
                "-" if summary is None or summary.mean is None else "%.2f" % summary.mean
            )
        rows.append(row)
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(v)) for w, v in zip(widths, row)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    for row in rows:
        lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


# -- fixture synthesis -------------------------------------------------------

_FIXTURE_FILES = {
    "rumor": "fixture_rumor.txt",
    "extend": "fixture_extend.txt",
    "squash": "fixture_squash.txt",
    "answer": "fixture_answer.txt",
}

_TITLE_RE = re.compile(r"\[Rumor Title\]\s*(.*)", re.DOTALL)
_CONTENT_RE = re.compile(r"\[Rumor Content\]\s*(.*)", re.DOTALL)
_KEYWORDS_RE = re.compile(r"\[Keywords\]\s*(.*)", re.DOTALL)


def _load_fixture_templates(directory: str | Path | None) -> dict[str, str]:
    templates = {}
    for stage, name in _FIXTURE_FILES.items():
        if directory is not None:
            text = (Path(directory) / name).read_text(encoding="utf-8")
        else:
            text = (
                resources.files("claimcheck")
                .joinpath("data/prompts/" + name)
                .read_text(encoding="utf-8")
            )
        templates[stage] = text
    return templates


def parse_rumor_completion(completion: str) -> dict | None:
    """Parse '[Rumor Title] ... SEPCODE [Rumor Content] ... SEPCODE
    [Keywords] a,b,c' into parts, or None when the shape is wrong."""
    parts = [p.strip() for p in (completion or "").split("SEPCODE")]
    if len(parts) < 3:
        return None
    title = content = keywords_text = None
    for part in parts:
        if title is None:
            m = _TITLE_RE.search(part)
            if m:
                title = m.group(1).strip()
                continue
        if content is None:
            m = _CONTENT_RE.search(part)
            if m:
                content = m.group(1).strip()
                continue
        if keywords_text is None:
            m = _KEYWORDS_RE.search(part)
            if m:
                keywords_text = m.group(1).strip()
    if not title or not content or keywords_text is None:
        return None
    keywords = [k.strip() for k in re.split(r"[,，]", keywords_text) if k.strip()]
    if not keywords:
        return None
    return {"title": title, "content": content, "keywords": keywords}


def synthesize_fixtures(
    gateway: Gateway,
    seed_questions: Sequence[str],
    out_path: str | Path | None = None,
    templates_dir: str | Path | None = None,
    generator_identity: str = "mock",
) -> tuple[list[dict], list[tuple[int, str]]]:
    """Build synthetic rumor records from seed questions.

    Each seed drives four generation calls: invent a rumor (title,
    content, keywords), extend it, refute it, and answer it. A seed whose
    rumor completion doesn't parse is skipped with a reason; the other
    stages take the text as produced. Returns (records, skipped).
    """
    templates = _load_fixture_templates(templates_dir)
    records: list[dict] = []
    skipped: list[tuple[int, str]] = []

    def generate(stage: str, **slots: str) -> str:
        prompt = _fill_slots(templates[stage], slots)
        return gateway.chat(ChatRequest.single("generator", prompt))

    for position, question in enumerate(seed_questions):
        if not question or not question.strip():
            skipped.append((position, "empty seed question"))
            continue
        completion = generate("rumor", question=question.strip())
        parsed = parse_rumor_completion(completion)
        if parsed is None:
            skipped.append((position, "rumor completion did not parse"))
            logger.warning(
                "seed %d: rumor completion did not parse; skipping", position
            )
            continue
        records.append(
            {
                "original_question": question.strip(),
                "title": parsed["title"],
                "keywords": parsed["keywords"],
                "content": parsed["content"],
                "extend_content": generate("extend", content=parsed["content"]),
                "squash_content": generate("squash", content=parsed["content"]),
                "answer_content": generate("answer", content=parsed["content"]),
                "generator": generator_identity,
            }
        )

    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return records, skipped
