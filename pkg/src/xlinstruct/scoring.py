"""Translation scoring: native corpus BLEU, a judge-prompted 0-100 quality
metric, a pluggable external scorer, and combined per-dataset reports.

BLEU here is the classical corpus-level formulation: clipped n-gram matches
(orders 1-4) summed over the corpus, geometric mean of the four precisions,
and a brevity penalty of exp(1 - ref_len/hyp_len) when the hypothesis side is
shorter. Scores are scaled to [0, 100].
"""

from __future__ import annotations

import json
import logging
import math
import subprocess
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import requests

from .backends import ChatBackend, DecodingConfig, PromptPayload
from .batching import BatchFailure, RateLimiter, call_with_retries, run_checkpointed
from .errors import (
    DuplicateId,
    EmptyCorpus,
    EmptyInput,
    EndpointUnreachable,
    ProtocolError,
    ScoreNotFound,
)
from .jsonl import read_jsonl, write_jsonl
from .judging import parse_labeled_score

logger = logging.getLogger(__name__)

EPSILON_NUMERATOR = 1e-9


@dataclass(frozen=True)
class ScoredPair:
    """One evaluation unit: source text, system hypothesis, reference."""

    id: str
    source_text: str
    hypothesis: str
    reference: str
    allow_empty: bool = False

    def __post_init__(self) -> None:
        if not self.allow_empty:
            if not self.hypothesis:
                raise EmptyInput(f"hypothesis of pair {self.id!r}")
            if not self.reference:
                raise EmptyInput(f"reference of pair {self.id!r}")


@dataclass(frozen=True)
class BleuConfig:
    tokenizer: str = "whitespace"  # "whitespace" | "character"
    smoothing: str = "epsilon"  # "epsilon" | "none"

    def __post_init__(self) -> None:
        if self.tokenizer not in ("whitespace", "character"):
            raise ValueError(f"unknown tokenizer: {self.tokenizer!r}")
        if self.smoothing not in ("epsilon", "none"):
            raise ValueError(f"unknown smoothing: {self.smoothing!r}")


@dataclass(frozen=True)
class BleuScore:
    score: float
    ngram_precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_length: int
    ref_length: int
    tokenizer: str = "whitespace"
    smoothing: str = "epsilon"
    all_hypotheses_empty: bool = False


def _tokenize(text: str, mode: str) -> list[str]:
    if mode == "whitespace":
        return text.split()
    return list(text)


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def corpus_bleu(pairs: Sequence[ScoredPair], config: BleuConfig | None = None) -> BleuScore:
    """Corpus-level BLEU with n-gram orders 1-4 against single references.

    With epsilon smoothing a zero clipped-match count is replaced by a 1e-9
    numerator so one hopeless order does not zero the whole corpus score;
    with smoothing off any zero precision yields a score of exactly 0. When
    every hypothesis tokenizes to nothing the score is 0 and the result is
    flagged instead of raising.
    """
    config = config or BleuConfig()
    if not pairs:
        raise EmptyCorpus("evaluation corpus")
    seen: set[str] = set()
    for pair in pairs:
        if pair.id in seen:
            raise DuplicateId(pair.id)
        seen.add(pair.id)

    matches = [0, 0, 0, 0]
    totals = [0, 0, 0, 0]
    hyp_length = 0
    ref_length = 0
    for pair in pairs:
        hyp = _tokenize(pair.hypothesis, config.tokenizer)
        ref = _tokenize(pair.reference, config.tokenizer)
        hyp_length += len(hyp)
        ref_length += len(ref)
        for order in range(1, 5):
            hyp_counts = _ngram_counts(hyp, order)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, order)
            totals[order - 1] += sum(hyp_counts.values())
            matches[order - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )

    if hyp_length == 0:
        return BleuScore(
            score=0.0,
            ngram_precisions=(0.0, 0.0, 0.0, 0.0),
            brevity_penalty=1.0,
            hyp_length=0,
            ref_length=ref_length,
            tokenizer=config.tokenizer,
            smoothing=config.smoothing,
            all_hypotheses_empty=True,
        )

    precisions: list[float] = []
    for order in range(4):
        if totals[order] == 0:
            precisions.append(EPSILON_NUMERATOR if config.smoothing == "epsilon" else 0.0)
        elif matches[order] == 0:
            numerator = EPSILON_NUMERATOR if config.smoothing == "epsilon" else 0.0
            precisions.append(numerator / totals[order])
        else:
            precisions.append(matches[order] / totals[order])

    if any(p == 0.0 for p in precisions):
        geometric_mean = 0.0
    else:
        geometric_mean = math.exp(sum(math.log(p) for p in precisions) / 4.0)
    brevity_penalty = (
        1.0 if hyp_length >= ref_length else math.exp(1.0 - ref_length / hyp_length)
    )
    return BleuScore(
        score=100.0 * brevity_penalty * geometric_mean,
        ngram_precisions=(precisions[0], precisions[1], precisions[2], precisions[3]),
        brevity_penalty=brevity_penalty,
        hyp_length=hyp_length,
        ref_length=ref_length,
        tokenizer=config.tokenizer,
        smoothing=config.smoothing,
    )


_GEMBA_TEMPLATE = """Score the following translation from {source} to {target} on a continuous scale from 0 to 100, where a score of zero means "no meaning preserved" and a score of one hundred means "perfect meaning and grammar".

{source} source: "{source_text}"
{target} translation: "{hypothesis}"
Score (0-100):"""

SCORE_LABEL = "Score"


def build_gemba_prompt(
    pair: ScoredPair,
    source_language: str,
    target_language: str,
    decoding: DecodingConfig | None = None,
) -> PromptPayload:
    """Direct-assessment prompt: judge one translation on a 0-100 scale."""
    if not pair.source_text:
        raise EmptyInput(f"source_text of pair {pair.id!r}")
    if not pair.hypothesis:
        raise EmptyInput(f"hypothesis of pair {pair.id!r}")
    text = _GEMBA_TEMPLATE.format(
        source=source_language,
        target=target_language,
        source_text=pair.source_text,
        hypothesis=pair.hypothesis,
    )
    return PromptPayload(
        system_or_user_text=text, attached_function=None, decoding=decoding or DecodingConfig()
    )


def parse_score_0_100(raw: str) -> float:
    """First number after a case-insensitive "Score" label, clamped to [0, 100]."""
    value, _end, _clamped = parse_labeled_score(raw, SCORE_LABEL)
    return value


@dataclass(frozen=True)
class GembaConfig:
    source_language: str = "English"
    target_language: str = "Korean"
    decoding: DecodingConfig = field(default_factory=DecodingConfig)
    max_retries: int = 3
    backoff_base: float = 0.5
    backoff_cap: float = 8.0
    max_in_flight: int = 1
    requests_per_minute: int | None = None


@dataclass
class GembaBatch:
    scores: list[tuple[str, float]]  # (pair id, score) in input order
    failures: list[BatchFailure]


def gemba_score(
    pairs: Sequence[ScoredPair],
    backend: ChatBackend,
    config: GembaConfig,
    checkpoint: str | Path | None = None,
) -> GembaBatch:
    """Judge every pair under the shared batch contract (retries, bounded
    in-flight calls, checkpoint resume, order-restoring assembly)."""
    rate_limiter = RateLimiter(config.requests_per_minute)

    def worker(pair: ScoredPair) -> tuple[str, float]:
        payload = build_gemba_prompt(
            pair, config.source_language, config.target_language, config.decoding
        )

        def attempt() -> float:
            rate_limiter.acquire()
            response = backend.complete(payload)
            text = getattr(response, "text", None)
            if text is None:
                raise ScoreNotFound(SCORE_LABEL)
            return parse_score_0_100(text)

        score, _attempts = call_with_retries(
            attempt,
            max_retries=config.max_retries,
            backoff_base=config.backoff_base,
            backoff_cap=config.backoff_cap,
        )
        return pair.id, score

    report = run_checkpointed(
        pairs,
        item_id=lambda p: p.id,
        worker=worker,
        encode=lambda pair, result: {"pair_id": pair.id, "score": result[1]},
        decode=lambda pair, record: (pair.id, float(record["score"])),
        checkpoint_path=checkpoint,
        id_field="pair_id",
        max_in_flight=config.max_in_flight,
    )
    return GembaBatch(scores=report.results, failures=report.failures)


@dataclass(frozen=True)
class ScorerEndpoint:
    """Descriptor for an out-of-process reference-based scorer.

    ``http`` endpoints receive a POST with a JSON array of
    {id, source, hypothesis, reference} objects and must answer with a JSON
    array of numbers in the same order. ``subprocess`` scorers read the same
    records as JSON lines on stdin and print one number per line.
    Scores are on ``scale`` ("0-1" or "0-100").
    """

    kind: str  # "http" | "subprocess"
    url: str | None = None
    argv: tuple[str, ...] | None = None
    scale: str = "0-1"
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.kind not in ("http", "subprocess"):
            raise ValueError(f"unknown scorer kind: {self.kind!r}")
        if self.kind == "http" and not self.url:
            raise ValueError("http scorer needs a url")
        if self.kind == "subprocess" and not self.argv:
            raise ValueError("subprocess scorer needs argv")
        if self.scale not in ("0-1", "0-100"):
            raise ValueError(f"unknown scale: {self.scale!r}")


def external_score(
    pairs: Sequence[ScoredPair], endpoint: ScorerEndpoint
) -> list[tuple[str, float]]:
    """Score pairs through an external endpoint; results keep input order."""
    if not pairs:
        raise EmptyInput("pairs")
    records = [
        {
            "id": pair.id,
            "source": pair.source_text,
            "hypothesis": pair.hypothesis,
            "reference": pair.reference,
        }
        for pair in pairs
    ]
    if endpoint.kind == "http":
        assert endpoint.url is not None
        try:
            response = requests.post(endpoint.url, json=records, timeout=endpoint.timeout)
        except requests.RequestException as exc:
            raise EndpointUnreachable(str(exc)) from exc
        if response.status_code != 200:
            raise ProtocolError(f"HTTP {response.status_code}")
        try:
            values = response.json()
        except ValueError as exc:
            raise ProtocolError(f"non-JSON response: {exc}") from exc
    else:
        assert endpoint.argv is not None
        stdin = "\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n"
        try:
            proc = subprocess.run(
                list(endpoint.argv),
                input=stdin,
                capture_output=True,
                text=True,
                timeout=endpoint.timeout,
            )
        except FileNotFoundError as exc:
            raise EndpointUnreachable(str(exc)) from exc
        except subprocess.TimeoutExpired as exc:
            raise EndpointUnreachable(f"scorer timed out after {endpoint.timeout}s") from exc
        if proc.returncode != 0:
            raise ProtocolError(f"scorer exited {proc.returncode}: {proc.stderr[:200]}")
        try:
            values = [float(line) for line in proc.stdout.split()]
        except ValueError as exc:
            raise ProtocolError(f"non-numeric scorer output: {exc}") from exc

    if not isinstance(values, list) or len(values) != len(pairs):
        got = len(values) if isinstance(values, list) else "non-array"
        raise ProtocolError(f"expected {len(pairs)} scores, got {got}")
    try:
        numeric = [float(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"non-numeric score in response: {exc}") from exc
    return [(pair.id, value) for pair, value in zip(pairs, numeric)]


@dataclass(frozen=True)
class MetricReport:
    """Per-dataset metric block: BLEU, judge metric, optional external metric,
    and their arithmetic mean."""

    dataset_name: str
    bleu: float
    gemba: float
    external: float | None
    average: float
    external_rescaled: bool = False
    bleu_tokenizer: str | None = None
    bleu_smoothing: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset_name": self.dataset_name,
            "bleu": self.bleu,
            "gemba": self.gemba,
            "external": self.external,
            "average": self.average,
            "external_rescaled": self.external_rescaled,
            "bleu_tokenizer": self.bleu_tokenizer,
            "bleu_smoothing": self.bleu_smoothing,
        }


def metric_report(
    dataset_name: str,
    bleu: BleuScore | float,
    gemba_scores: Sequence[float],
    external: Sequence[float] | None = None,
    external_scale: str = "0-1",
) -> MetricReport:
    """Combine per-metric results into one dataset block.

    The judge metric is the mean of its per-pair scores. External scores on a
    0-1 scale are rescaled by 100 before averaging and flagged as such. The
    average is the arithmetic mean of whichever metrics are present.
    """
    if not gemba_scores:
        raise EmptyInput("gemba_scores")
    if isinstance(bleu, BleuScore):
        bleu_value = bleu.score
        tokenizer: str | None = bleu.tokenizer
        smoothing: str | None = bleu.smoothing
    else:
        bleu_value = float(bleu)
        tokenizer = None
        smoothing = None
    gemba_value = sum(gemba_scores) / len(gemba_scores)
    rescaled = False
    external_value: float | None = None
    if external is not None:
        if not external:
            raise EmptyInput("external scores")
        external_value = sum(external) / len(external)
        if external_scale == "0-1":
            external_value *= 100.0
            rescaled = True
    present = [bleu_value, gemba_value] + ([external_value] if external_value is not None else [])
    return MetricReport(
        dataset_name=dataset_name,
        bleu=bleu_value,
        gemba=gemba_value,
        external=external_value,
        average=sum(present) / len(present),
        external_rescaled=rescaled,
        bleu_tokenizer=tokenizer,
        bleu_smoothing=smoothing,
    )


def render_metric_reports(reports: Sequence[MetricReport]) -> str:
    """Aligned text table: one row per dataset, columns per metric plus Avg."""
    headers = ["Dataset", "BLEU", "GEMBA", "External", "Avg."]
    rows = []
    for report in reports:
        rows.append(
            [
                report.dataset_name,
                f"{report.bleu:.2f}",
                f"{report.gemba:.2f}",
                "-" if report.external is None else f"{report.external:.2f}",
                f"{report.average:.2f}",
            ]
        )
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    lines = ["  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(headers, widths)))]
    for row in rows:
        lines.append(
            "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths)))
        )
    return "\n".join(lines)


def load_scored_pairs(path: str | Path, allow_empty: bool = False) -> list[ScoredPair]:
    """Load the evaluation input file: {id, source_text, hypothesis, reference}."""
    pairs: list[ScoredPair] = []
    seen: set[str] = set()
    for line_no, raw in read_jsonl(path):
        obj = json.loads(raw)
        pair = ScoredPair(
            id=str(obj["id"]),
            source_text=str(obj.get("source_text", "")),
            hypothesis=str(obj["hypothesis"]),
            reference=str(obj["reference"]),
            allow_empty=allow_empty,
        )
        if pair.id in seen:
            raise DuplicateId(pair.id)
        seen.add(pair.id)
        pairs.append(pair)
    return pairs


def save_scored_pairs(pairs: Iterable[ScoredPair], path: str | Path) -> None:
    write_jsonl(
        path,
        [
            {
                "id": p.id,
                "source_text": p.source_text,
                "hypothesis": p.hypothesis,
                "reference": p.reference,
            }
            for p in pairs
        ],
    )
