"""Assembly and export of trainer-ready pairs from a translated corpus.

Each pair maps the rendered English sample (instruction, optional input,
response) to the full translated text, with no translation directive anywhere
in the input: the downstream trainer is supposed to learn translation purely
from the pairing. Exported metadata pins loss masking to target tokens only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .dataset import render_instruction_text
from .errors import MalformedRecord, ValidationFailed, XlinstructError
from .jsonl import read_jsonl, write_jsonl
from .translation import TranslatedCorpus

DEFAULT_DIRECTIVE_PHRASES = ("translate", "번역")

EXPORT_FORMATS = ("pair_records", "chat_records")


@dataclass(frozen=True)
class TrainingPair:
    input_text: str
    target_text: str
    source_id: str


@dataclass(frozen=True)
class TrainingSet:
    pairs: tuple[TrainingPair, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def build_training_pairs(translated: TranslatedCorpus) -> TrainingSet:
    """One pair per validated translated sample, in corpus order.

    input = rendered English instruction text + newline + English response;
    target = translated instruction + newline + translated response.
    """
    pairs: list[TrainingPair] = []
    for item in translated.samples:
        try:
            item.validate()
        except XlinstructError as exc:
            raise ValidationFailed(item.source.id, str(exc)) from exc
        except ValueError as exc:
            raise ValidationFailed(item.source.id, str(exc)) from exc
        input_text = f"{render_instruction_text(item.source)}\n{item.source.response}"
        target_text = f"{item.translated_instruction}\n{item.translated_response}"
        pairs.append(
            TrainingPair(input_text=input_text, target_text=target_text, source_id=item.source.id)
        )
    metadata = {
        "target_language": translated.target_language,
        "translator_id": translated.backend_id,
        "loss_masking": "target_only",
        "pair_count": str(len(pairs)),
        "source_failures": str(len(translated.failures)),
    }
    return TrainingSet(pairs=tuple(pairs), metadata=metadata)


@dataclass(frozen=True)
class DirectiveHit:
    source_id: str
    phrase: str
    position: int


def scan_for_directives(
    training_set: TrainingSet, phrases: Sequence[str] = DEFAULT_DIRECTIVE_PHRASES
) -> list[DirectiveHit]:
    """Case-insensitive scan of every input for translation-directive phrases.

    Hits are reported, never dropped: the scan is a heuristic guard and a
    legitimate English sample may mention translation.
    """
    hits: list[DirectiveHit] = []
    lowered_phrases = [p.lower() for p in phrases if p]
    for pair in training_set.pairs:
        haystack = pair.input_text.lower()
        for phrase in lowered_phrases:
            position = haystack.find(phrase)
            if position >= 0:
                hits.append(DirectiveHit(source_id=pair.source_id, phrase=phrase, position=position))
    return hits


def _metadata_sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def export_training_set(
    training_set: TrainingSet, path: str | Path, format: str = "pair_records"
) -> None:
    """Write the training set plus a metadata sidecar (<file>.meta.json).

    ``pair_records``: one {input, target, source_id} object per line.
    ``chat_records``: one two-turn conversation per line (user: input,
    assistant: target).
    """
    if format not in EXPORT_FORMATS:
        raise ValueError(f"unknown export format: {format!r}")
    path = Path(path)
    records: list[dict[str, Any]] = []
    for pair in training_set.pairs:
        if format == "pair_records":
            records.append(
                {"input": pair.input_text, "target": pair.target_text, "source_id": pair.source_id}
            )
        else:
            records.append(
                {
                    "messages": [
                        {"role": "user", "content": pair.input_text},
                        {"role": "assistant", "content": pair.target_text},
                    ],
                    "source_id": pair.source_id,
                }
            )
    write_jsonl(path, records)
    sidecar = {"format": format, "metadata": dict(sorted(training_set.metadata.items()))}
    _metadata_sidecar(path).write_text(
        json.dumps(sidecar, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def import_training_set(path: str | Path, format: str = "pair_records") -> TrainingSet:
    """Inverse of :func:`export_training_set` (metadata from the sidecar)."""
    if format not in EXPORT_FORMATS:
        raise ValueError(f"unknown export format: {format!r}")
    path = Path(path)
    pairs: list[TrainingPair] = []
    for line_no, raw in read_jsonl(path):
        obj = json.loads(raw)
        try:
            if format == "pair_records":
                pairs.append(
                    TrainingPair(
                        input_text=obj["input"],
                        target_text=obj["target"],
                        source_id=obj.get("source_id", ""),
                    )
                )
            else:
                messages = obj["messages"]
                if (
                    len(messages) != 2
                    or messages[0]["role"] != "user"
                    or messages[1]["role"] != "assistant"
                ):
                    raise MalformedRecord(line_no, "expected a two-turn user/assistant record")
                pairs.append(
                    TrainingPair(
                        input_text=messages[0]["content"],
                        target_text=messages[1]["content"],
                        source_id=obj.get("source_id", ""),
                    )
                )
        except (KeyError, TypeError) as exc:
            raise MalformedRecord(line_no, f"bad training record: {exc}") from exc
    metadata: dict[str, str] = {}
    sidecar = _metadata_sidecar(path)
    if sidecar.exists():
        metadata = dict(json.loads(sidecar.read_text(encoding="utf-8")).get("metadata", {}))
    return TrainingSet(pairs=tuple(pairs), metadata=metadata)


def directive_scan_summary(hits: Iterable[DirectiveHit]) -> str:
    hits = list(hits)
    if not hits:
        return "directive scan: clean (0 hits)"
    lines = [f"directive scan: {len(hits)} hit(s)"]
    for hit in hits:
        lines.append(f"  {hit.source_id}: {hit.phrase!r} at offset {hit.position}")
    return "\n".join(lines)
