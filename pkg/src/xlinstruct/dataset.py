"""Instruction-corpus loading, storage, categorization, and stratified sampling.

A corpus is a line-delimited UTF-8 file: one flat JSON object per line with
string fields ``id``, ``instruction``, ``input``, ``response``, ``category``.
Unknown fields are preserved on round-trip. An optional first line of the form
``{"_meta": {...}}`` (no ``id`` field) carries corpus-level metadata; plain
files without it load with defaults.
"""

from __future__ import annotations

import enum
import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import (
    DuplicateId,
    EmptyCorpus,
    InsufficientSamples,
    InvalidPattern,
    MalformedRecord,
)
from .jsonl import dumps_record, read_jsonl

_CORE_FIELDS = ("id", "instruction", "input", "response", "category")


class TaskCategory(enum.Enum):
    """The four task families used to stratify instruction corpora."""

    CORRECTION = "Correction"
    REPHRASE = "Rephrase"
    CODE = "Code"
    OTHERS = "Others"

    @classmethod
    def from_label(cls, label: str) -> "TaskCategory":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unrecognized category label: {label!r}")


@dataclass(frozen=True)
class InstructionSample:
    """One (instruction, optional input, response) record."""

    id: str
    instruction: str
    input: str
    response: str
    category: TaskCategory
    extras: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.id:
            raise ValueError("sample id must be non-empty")
        if not self.instruction.strip():
            raise ValueError(f"sample {self.id!r}: instruction empty after trimming")
        if not self.response.strip():
            raise ValueError(f"sample {self.id!r}: response empty after trimming")


@dataclass(frozen=True)
class Corpus:
    """An ordered, id-unique collection of instruction samples."""

    samples: tuple[InstructionSample, ...]
    source_language: str = "en"
    metadata: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def by_category(self) -> dict[TaskCategory, list[InstructionSample]]:
        groups: dict[TaskCategory, list[InstructionSample]] = {}
        for sample in self.samples:
            groups.setdefault(sample.category, []).append(sample)
        return groups


def render_instruction_text(sample: InstructionSample) -> str:
    """Render the single instruction text used downstream.

    Samples with a non-empty ``input`` are rendered as instruction, blank
    line, input; otherwise the instruction alone.
    """
    if sample.input:
        return f"{sample.instruction}\n\n{sample.input}"
    return sample.instruction


def _normalize_crlf(text: str) -> str:
    return text.replace("\r\n", "\n")


def _parse_record(
    line_no: int, raw: str, normalize_newlines: bool
) -> InstructionSample:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "record is not an object")
    for name in _CORE_FIELDS:
        if name not in obj:
            raise MalformedRecord(line_no, f"missing field {name!r}")
        if not isinstance(obj[name], str):
            raise MalformedRecord(line_no, f"field {name!r} is not a string")
    try:
        category = TaskCategory.from_label(obj["category"])
    except ValueError as exc:
        raise MalformedRecord(line_no, str(exc)) from exc

    fix = _normalize_crlf if normalize_newlines else (lambda s: s)
    sample = InstructionSample(
        id=obj["id"],
        instruction=fix(obj["instruction"]),
        input=fix(obj["input"]),
        response=fix(obj["response"]),
        category=category,
        extras={k: v for k, v in obj.items() if k not in _CORE_FIELDS},
    )
    try:
        sample.validate()
    except ValueError as exc:
        raise MalformedRecord(line_no, str(exc)) from exc
    return sample


def load_corpus(
    path: str | Path, strict: bool = True, normalize_newlines: bool = True
) -> Corpus:
    """Load a corpus file, preserving record order.

    In strict mode any malformed line aborts with its line number; in lenient
    mode malformed lines (including duplicate ids) are skipped and the skip
    count is recorded under ``metadata["skipped_records"]``.

    ``normalize_newlines`` rewrites CRLF to LF in the text fields at load so
    that segmentation sees a single newline convention; disable it when an
    exact byte round-trip of CRLF content is required.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)

    samples: list[InstructionSample] = []
    seen_ids: set[str] = set()
    skipped = 0
    source_language = "en"
    metadata: dict[str, str] = {}

    for line_no, raw in read_jsonl(path):
        if line_no == 1:
            header = _try_parse_header(raw)
            if header is not None:
                source_language = header.get("source_language", "en")
                metadata = dict(header.get("metadata", {}))
                continue
        try:
            sample = _parse_record(line_no, raw, normalize_newlines)
            if sample.id in seen_ids:
                raise DuplicateId(sample.id)
        except DuplicateId:
            if strict:
                raise
            skipped += 1
            continue
        except MalformedRecord:
            if strict:
                raise
            skipped += 1
            continue
        seen_ids.add(sample.id)
        samples.append(sample)

    if skipped:
        metadata = dict(metadata)
        metadata["skipped_records"] = str(skipped)
    return Corpus(samples=tuple(samples), source_language=source_language, metadata=metadata)


def _try_parse_header(raw: str) -> dict[str, Any] | None:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError:
        return None
    if isinstance(obj, dict) and "_meta" in obj and "id" not in obj:
        meta = obj["_meta"]
        return meta if isinstance(meta, dict) else {}
    return None


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus so that ``load_corpus`` reproduces it field-for-field."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "_meta": {
                "source_language": corpus.source_language,
                "metadata": dict(sorted(corpus.metadata.items())),
            }
        }
        fh.write(dumps_record(header) + "\n")
        for sample in corpus.samples:
            record: dict[str, Any] = {
                "id": sample.id,
                "instruction": sample.instruction,
                "input": sample.input,
                "response": sample.response,
                "category": sample.category.value,
            }
            record.update(sample.extras)
            fh.write(dumps_record(record) + "\n")


def sample_stratified(corpus: Corpus, per_category: int, seed: int) -> Corpus:
    """Draw exactly ``per_category`` samples from each category present.

    Selection is a deterministic function of (corpus order, seed): each
    category's sample list is shuffled with a seeded generator and the first
    ``per_category`` survivors are kept. Output order is category-major (enum
    declaration order) and original corpus order within each category.
    """
    if per_category <= 0:
        raise ValueError("per_category must be positive")
    groups = corpus.by_category()
    rng = random.Random(seed)
    chosen: list[InstructionSample] = []
    index_of = {sample.id: i for i, sample in enumerate(corpus.samples)}
    for category in TaskCategory:
        if category not in groups:
            continue
        pool = groups[category]
        if len(pool) < per_category:
            raise InsufficientSamples(category.value, len(pool), per_category)
        shuffled = list(pool)
        rng.shuffle(shuffled)
        picked = sorted(shuffled[:per_category], key=lambda s: index_of[s.id])
        chosen.extend(picked)
    metadata = dict(corpus.metadata)
    metadata["stratified_per_category"] = str(per_category)
    metadata["stratified_seed"] = str(seed)
    return Corpus(samples=tuple(chosen), source_language=corpus.source_language, metadata=metadata)


CategoryRule = tuple[str, TaskCategory]


def compile_rules(rules: Sequence[CategoryRule]) -> list[tuple[re.Pattern[str], TaskCategory]]:
    if not rules:
        raise InvalidPattern(None, "empty rule list")
    compiled = []
    for index, (pattern, category) in enumerate(rules):
        try:
            compiled.append((re.compile(pattern, re.IGNORECASE), category))
        except re.error as exc:
            raise InvalidPattern(index, str(exc)) from exc
    return compiled


def categorize(sample: InstructionSample, rules: Sequence[CategoryRule]) -> TaskCategory:
    """Return the category of the first rule matching the instruction text.

    Patterns are case-insensitive regular expressions searched anywhere in the
    text, so plain keywords behave as substring rules. Falls back to
    ``Others`` when nothing matches.
    """
    compiled = compile_rules(rules)
    text = render_instruction_text(sample)
    for pattern, category in compiled:
        if pattern.search(text):
            return category
    return TaskCategory.OTHERS


def categorize_corpus(corpus: Corpus, rules: Sequence[CategoryRule]) -> Corpus:
    """Re-label every sample via the rule table (first match wins)."""
    compiled = compile_rules(rules)
    relabeled = []
    for sample in corpus.samples:
        text = render_instruction_text(sample)
        category = TaskCategory.OTHERS
        for pattern, cat in compiled:
            if pattern.search(text):
                category = cat
                break
        relabeled.append(
            InstructionSample(
                id=sample.id,
                instruction=sample.instruction,
                input=sample.input,
                response=sample.response,
                category=category,
                extras=sample.extras,
            )
        )
    return Corpus(
        samples=tuple(relabeled),
        source_language=corpus.source_language,
        metadata=corpus.metadata,
    )


def load_rules(path: str | Path) -> list[CategoryRule]:
    """Load a rule table: one ``pattern<TAB>category`` per line.

    Blank lines and lines starting with ``#`` are ignored.
    """
    rules: list[CategoryRule] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise InvalidPattern(line_no - 1, f"line {line_no}: missing tab separator")
            pattern, label = line.split("\t", 1)
            try:
                category = TaskCategory.from_label(label.strip())
            except ValueError as exc:
                raise InvalidPattern(line_no - 1, str(exc)) from exc
            rules.append((pattern, category))
    if not rules:
        raise InvalidPattern(None, "empty rule list")
    return rules


def default_rules_path() -> Path:
    return Path(__file__).parent / "data" / "category_rules.tsv"


def default_rules() -> list[CategoryRule]:
    return load_rules(default_rules_path())


def category_counts(samples: Iterable[InstructionSample]) -> dict[TaskCategory, int]:
    counts: dict[TaskCategory, int] = {}
    for sample in samples:
        counts[sample.category] = counts.get(sample.category, 0) + 1
    return counts


def ensure_non_empty(corpus: Corpus) -> None:
    if not corpus.samples:
        raise EmptyCorpus()
