"""Automated quality assessment of translated samples.

A judge backend scores each translated sample on two 0-100 scales:
completeness (are both instruction and output still there?) and
informativeness (how much meaningful information survived?). Reports
aggregate per-category averages, their unweighted mean, and the
informativeness-to-completeness ratio.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .backends import ChatBackend, DecodingConfig, PromptPayload
from .batching import BatchFailure, RateLimiter, call_with_retries, run_checkpointed
from .dataset import TaskCategory
from .errors import EmptyInput, EmptySample, MissingCategory, ScoreNotFound
from .jsonl import read_jsonl, write_jsonl
from .translation import TranslatedCorpus, TranslatedSample

logger = logging.getLogger(__name__)

_ASSESSMENT_TEMPLATE = """Score the following text with respect to the completeness on a continuous scale from 0 to 100, where a score of zero means "no instruction or no output" and score of one hundred means "there are both instruction and output", with a brief explanation.
In addition, Score the following text with respect to the informativeness on a continuous scale from 0 to 100, where a score of zero means "no meaningful information" and score of one hundred means "there is enough meaningful information", with a brief explanation.

target: "{sample}"
Completeness Score (0-100):"""

COMPLETENESS_LABEL = "Completeness Score"
INFORMATIVENESS_LABEL = "Informativeness Score"

_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")
# Scale reminders like "(0-100)" or "(0 - 100):" right after a label are part
# of the label, not the score.
_SCALE_SUFFIX = re.compile(r"\s*\(\s*0\s*-\s*100\s*\)\s*:?")


def build_assessment_prompt(
    translated: TranslatedSample, decoding: DecodingConfig | None = None
) -> PromptPayload:
    """Render the judge prompt for one translated sample.

    The judged text is the translated instruction, a blank line, and the
    translated response, quoted inside the template's target slot.
    """
    if not translated.translated_instruction.strip():
        raise EmptySample(translated.source.id, "translated_instruction")
    if not translated.translated_response.strip():
        raise EmptySample(translated.source.id, "translated_response")
    sample_text = f"{translated.translated_instruction}\n\n{translated.translated_response}"
    return PromptPayload(
        system_or_user_text=_ASSESSMENT_TEMPLATE.format(sample=sample_text),
        attached_function=None,
        decoding=decoding or DecodingConfig(),
    )


@dataclass(frozen=True)
class QualityAssessment:
    sample_id: str
    completeness: float
    informativeness: float
    completeness_rationale: str = ""
    informativeness_rationale: str = ""
    clamped: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "completeness": self.completeness,
            "informativeness": self.informativeness,
            "completeness_rationale": self.completeness_rationale,
            "informativeness_rationale": self.informativeness_rationale,
            "clamped": self.clamped,
        }


def parse_labeled_score(text: str, label: str, start: int = 0) -> tuple[float, int, bool]:
    """Find ``label`` (case-insensitive) at or after ``start`` and return the
    first number following it, its end offset, and whether clamping applied."""
    low = text.lower()
    pos = low.find(label.lower(), start)
    if pos < 0:
        raise ScoreNotFound(label)
    cursor = pos + len(label)
    scale = _SCALE_SUFFIX.match(text, cursor)
    if scale is not None:
        cursor = scale.end()
    match = _NUMBER.search(text, cursor)
    if match is None:
        raise ScoreNotFound(label)
    value = float(match.group())
    clamped = value < 0.0 or value > 100.0
    return min(max(value, 0.0), 100.0), match.end(), clamped


def parse_assessment(raw_text: str, sample_id: str) -> QualityAssessment:
    """Parse the judge reply: label-anchored numbers plus nearby rationales.

    The rationale for each score is the text between that score's number and
    the next label (or the end of the reply).
    """
    completeness, c_end, c_clamped = parse_labeled_score(raw_text, COMPLETENESS_LABEL)
    informativeness, i_end, i_clamped = parse_labeled_score(
        raw_text, INFORMATIVENESS_LABEL, start=c_end
    )
    low = raw_text.lower()
    i_label_pos = low.find(INFORMATIVENESS_LABEL.lower(), c_end)
    completeness_rationale = raw_text[c_end:i_label_pos].strip()
    informativeness_rationale = raw_text[i_end:].strip()
    return QualityAssessment(
        sample_id=sample_id,
        completeness=completeness,
        informativeness=informativeness,
        completeness_rationale=completeness_rationale,
        informativeness_rationale=informativeness_rationale,
        clamped=c_clamped or i_clamped,
    )


@dataclass(frozen=True)
class JudgeConfig:
    decoding: DecodingConfig = field(default_factory=DecodingConfig)
    max_retries: int = 3
    backoff_base: float = 0.5
    backoff_cap: float = 8.0
    max_in_flight: int = 1
    requests_per_minute: int | None = None


@dataclass
class AssessmentBatch:
    assessments: list[QualityAssessment]
    failures: list[BatchFailure]


def assess_sample(
    translated: TranslatedSample,
    judge: ChatBackend,
    config: JudgeConfig,
    rate_limiter: RateLimiter | None = None,
) -> QualityAssessment:
    payload = build_assessment_prompt(translated, config.decoding)

    def attempt() -> QualityAssessment:
        if rate_limiter is not None:
            rate_limiter.acquire()
        response = judge.complete(payload)
        text = getattr(response, "text", None)
        if text is None:
            raise ScoreNotFound(COMPLETENESS_LABEL)
        return parse_assessment(text, translated.source.id)

    assessment, _attempts = call_with_retries(
        attempt,
        max_retries=config.max_retries,
        backoff_base=config.backoff_base,
        backoff_cap=config.backoff_cap,
    )
    return assessment


def assess_corpus(
    translated: TranslatedCorpus,
    judge: ChatBackend,
    config: JudgeConfig,
    checkpoint: str | Path | None = None,
) -> AssessmentBatch:
    """Assess every translated sample with the batch contract of translation:
    bounded in-flight calls, checkpoint resume, order-restoring assembly.

    Samples whose judge replies stay unparseable after retries are recorded
    as failures and excluded from any later aggregation.
    """
    rate_limiter = RateLimiter(config.requests_per_minute)

    def worker(item: TranslatedSample) -> QualityAssessment:
        return assess_sample(item, judge, config, rate_limiter)

    def decode(item: TranslatedSample, record: dict[str, Any]) -> QualityAssessment:
        return QualityAssessment(
            sample_id=str(record["sample_id"]),
            completeness=float(record["completeness"]),
            informativeness=float(record["informativeness"]),
            completeness_rationale=str(record.get("completeness_rationale", "")),
            informativeness_rationale=str(record.get("informativeness_rationale", "")),
            clamped=bool(record.get("clamped", False)),
        )

    report = run_checkpointed(
        translated.samples,
        item_id=lambda s: s.source.id,
        worker=worker,
        encode=lambda item, result: result.to_dict(),
        decode=decode,
        checkpoint_path=checkpoint,
        id_field="sample_id",
        max_in_flight=config.max_in_flight,
    )
    if report.failures:
        logger.warning("%d samples left unassessed", len(report.failures))
    return AssessmentBatch(assessments=report.results, failures=report.failures)


@dataclass(frozen=True)
class CategoryBreakdown:
    avg_completeness: float
    avg_informativeness: float
    n: int


@dataclass(frozen=True)
class QualityReport:
    """Per-category averages plus the overall columns.

    The overall averages are unweighted means of the per-category averages
    (not of all samples); with equal category sizes the two definitions
    coincide. ``ratio_percent`` is 100 * avg informativeness / avg
    completeness, computed on the unrounded averages.
    """

    per_category: dict[TaskCategory, CategoryBreakdown]
    avg_completeness: float
    avg_informativeness: float
    ratio_percent: float
    unassessed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "per_category": {
                category.value: {
                    "avg_completeness": stats.avg_completeness,
                    "avg_informativeness": stats.avg_informativeness,
                    "n": stats.n,
                }
                for category, stats in sorted(
                    self.per_category.items(), key=lambda kv: list(TaskCategory).index(kv[0])
                )
            },
            "avg_completeness": self.avg_completeness,
            "avg_informativeness": self.avg_informativeness,
            "ratio_percent": self.ratio_percent,
            "unassessed": self.unassessed,
        }


def aggregate(
    assessments: Sequence[QualityAssessment],
    categories: Mapping[str, TaskCategory],
    unassessed: int = 0,
) -> QualityReport:
    """Aggregate assessments into per-category and overall columns.

    Sums use ``math.fsum`` so the result is exactly permutation-invariant.
    """
    if not assessments:
        raise EmptyInput("assessments")
    buckets: dict[TaskCategory, tuple[list[float], list[float]]] = {}
    for assessment in assessments:
        if assessment.sample_id not in categories:
            raise MissingCategory(assessment.sample_id)
        category = categories[assessment.sample_id]
        c_list, i_list = buckets.setdefault(category, ([], []))
        c_list.append(assessment.completeness)
        i_list.append(assessment.informativeness)

    per_category: dict[TaskCategory, CategoryBreakdown] = {}
    for category in TaskCategory:
        if category not in buckets:
            continue
        c_list, i_list = buckets[category]
        per_category[category] = CategoryBreakdown(
            avg_completeness=math.fsum(c_list) / len(c_list),
            avg_informativeness=math.fsum(i_list) / len(i_list),
            n=len(c_list),
        )
    avg_c = math.fsum(s.avg_completeness for s in per_category.values()) / len(per_category)
    avg_i = math.fsum(s.avg_informativeness for s in per_category.values()) / len(per_category)
    ratio = 100.0 * avg_i / avg_c if avg_c > 0 else 0.0
    return QualityReport(
        per_category=per_category,
        avg_completeness=avg_c,
        avg_informativeness=avg_i,
        ratio_percent=ratio,
        unassessed=unassessed,
    )


def aggregate_from_category_averages(
    completeness: Sequence[float], informativeness: Sequence[float]
) -> tuple[float, float, float]:
    """Overall columns straight from per-category averages (one value per
    category, same order); returns (avg C, avg I, ratio percent)."""
    if not completeness or len(completeness) != len(informativeness):
        raise EmptyInput("category averages")
    avg_c = sum(completeness) / len(completeness)
    avg_i = sum(informativeness) / len(informativeness)
    ratio = 100.0 * avg_i / avg_c if avg_c > 0 else 0.0
    return avg_c, avg_i, ratio


def render_quality_report(report: QualityReport) -> str:
    """Aligned text table: per-category C and I columns, Avg, and Ratio."""
    categories = [c for c in TaskCategory if c in report.per_category]
    headers = (
        [f"C:{c.value}" for c in categories]
        + ["C:Avg"]
        + [f"I:{c.value}" for c in categories]
        + ["I:Avg", "Ratio(%)"]
    )
    values = (
        [report.per_category[c].avg_completeness for c in categories]
        + [report.avg_completeness]
        + [report.per_category[c].avg_informativeness for c in categories]
        + [report.avg_informativeness, report.ratio_percent]
    )
    cells = [f"{v:.2f}" for v in values]
    widths = [max(len(h), len(v)) for h, v in zip(headers, cells)]
    header_row = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    value_row = "  ".join(v.rjust(w) for v, w in zip(cells, widths))
    lines = [header_row, value_row]
    counts = ", ".join(f"{c.value}={report.per_category[c].n}" for c in categories)
    lines.append(f"samples per category: {counts}; unassessed: {report.unassessed}")
    return "\n".join(lines)


def save_assessments(assessments: Iterable[QualityAssessment], path: str | Path) -> None:
    write_jsonl(path, [a.to_dict() for a in assessments])


def load_assessments(path: str | Path) -> list[QualityAssessment]:
    out = []
    for _line_no, raw in read_jsonl(path):
        obj = json.loads(raw)
        out.append(
            QualityAssessment(
                sample_id=obj["sample_id"],
                completeness=float(obj["completeness"]),
                informativeness=float(obj["informativeness"]),
                completeness_rationale=obj.get("completeness_rationale", ""),
                informativeness_rationale=obj.get("informativeness_rationale", ""),
                clamped=bool(obj.get("clamped", False)),
            )
        )
    return out
