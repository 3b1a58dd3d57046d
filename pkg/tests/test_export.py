from __future__ import annotations

import json

import pytest

from xlinstruct.backends import MockBackend
from xlinstruct.errors import ValidationFailed
from xlinstruct.export import (
    DEFAULT_DIRECTIVE_PHRASES,
    TrainingPair,
    TrainingSet,
    build_training_pairs,
    directive_scan_summary,
    export_training_set,
    import_training_set,
    scan_for_directives,
)
from xlinstruct.translation import (
    TranslatedCorpus,
    TranslatedSample,
    TranslationConfig,
    translate_corpus,
)

from .conftest import make_corpus, make_sample


def translated_corpus(n=4) -> TranslatedCorpus:
    return translate_corpus(
        make_corpus(n), MockBackend(mode="tag", tag="ko"), TranslationConfig(backoff_base=0)
    )


class TestBuildTrainingPairs:
    def test_single_sample_contract(self):
        source = make_sample(instruction="Fix: He go.", response="He goes.")
        item = TranslatedSample(
            source=source,
            translated_segments=("고치기: He go.", "He goes."),
            instruction_segment_count=1,
            translated_instruction="고치기: He go.",
            translated_response="He goes.",
            backend_id="mock",
            attempts=1,
            target_language="Korean",
        )
        corpus = TranslatedCorpus(samples=(item,), failures=(), target_language="Korean",
                                  backend_id="mock")
        training_set = build_training_pairs(corpus)
        assert len(training_set) == 1
        pair = training_set.pairs[0]
        assert pair.input_text == "Fix: He go.\nHe goes."
        assert pair.target_text == "고치기: He go.\nHe goes."
        assert pair.source_id == source.id

    def test_input_field_rendered_with_blank_line(self):
        source = make_sample(instruction="Classify.", input_text="Great movie", response="Positive")
        item = TranslatedSample(
            source=source,
            translated_segments=("분류.", "", "Great movie", "긍정"),
            instruction_segment_count=3,
            translated_instruction="분류.\n\nGreat movie",
            translated_response="긍정",
            backend_id="mock",
            attempts=1,
            target_language="Korean",
        )
        corpus = TranslatedCorpus(samples=(item,), failures=(), target_language="Korean",
                                  backend_id="mock")
        pair = build_training_pairs(corpus).pairs[0]
        assert pair.input_text == "Classify.\n\nGreat movie\nPositive"

    def test_empty_corpus(self):
        corpus = TranslatedCorpus(samples=(), failures=(), target_language="Korean",
                                  backend_id="mock")
        training_set = build_training_pairs(corpus)
        assert len(training_set) == 0
        assert training_set.metadata["loss_masking"] == "target_only"

    def test_metadata_pins_target_only_loss_and_counts(self):
        corpus = translated_corpus(5)
        training_set = build_training_pairs(corpus)
        assert training_set.metadata["loss_masking"] == "target_only"
        assert training_set.metadata["target_language"] == "Korean"
        assert training_set.metadata["pair_count"] == "5"
        assert training_set.metadata["source_failures"] == "0"

    def test_order_preserved(self):
        corpus = translated_corpus(7)
        training_set = build_training_pairs(corpus)
        assert [p.source_id for p in training_set] == [s.source.id for s in corpus.samples]

    def test_inconsistent_sample_fails_validation(self):
        source = make_sample()
        broken = TranslatedSample(
            source=source,
            translated_segments=("only one",),  # source has 3 segments
            instruction_segment_count=1,
            translated_instruction="only one",
            translated_response="",
            backend_id="mock",
            attempts=1,
            target_language="Korean",
        )
        corpus = TranslatedCorpus(samples=(broken,), failures=(), target_language="Korean",
                                  backend_id="mock")
        with pytest.raises(ValidationFailed):
            build_training_pairs(corpus)

    def test_five_thousand_pairs(self):
        corpus = translated_corpus(5000)
        assert len(build_training_pairs(corpus)) == 5000


class TestExportFormats:
    def test_pair_records_round_trip(self, tmp_path):
        training_set = build_training_pairs(translated_corpus(6))
        path = tmp_path / "pairs.jsonl"
        export_training_set(training_set, path, format="pair_records")
        reimported = import_training_set(path, format="pair_records")
        assert reimported.pairs == training_set.pairs
        assert reimported.metadata == dict(sorted(training_set.metadata.items()))

    def test_chat_records_round_trip(self, tmp_path):
        training_set = build_training_pairs(translated_corpus(6))
        path = tmp_path / "chat.jsonl"
        export_training_set(training_set, path, format="chat_records")
        reimported = import_training_set(path, format="chat_records")
        assert reimported.pairs == training_set.pairs

    def test_chat_records_shape(self, tmp_path):
        training_set = build_training_pairs(translated_corpus(1))
        path = tmp_path / "chat.jsonl"
        export_training_set(training_set, path, format="chat_records")
        record = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
        assert [m["role"] for m in record["messages"]] == ["user", "assistant"]
        assert record["messages"][0]["content"] == training_set.pairs[0].input_text

    def test_sidecar_written(self, tmp_path):
        training_set = build_training_pairs(translated_corpus(2))
        path = tmp_path / "pairs.jsonl"
        export_training_set(training_set, path)
        sidecar = json.loads((tmp_path / "pairs.jsonl.meta.json").read_text(encoding="utf-8"))
        assert sidecar["metadata"]["loss_masking"] == "target_only"
        assert sidecar["format"] == "pair_records"

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            export_training_set(TrainingSet(pairs=()), tmp_path / "x.jsonl", format="parquet")


class TestDirectiveScan:
    def test_clean_set_has_no_hits(self):
        training_set = build_training_pairs(translated_corpus(10))
        assert scan_for_directives(training_set) == []

    def test_seeded_control_is_caught(self):
        clean = TrainingPair(input_text="Fix the grammar.\nDone.", target_text="t", source_id="ok")
        dirty = TrainingPair(
            input_text="Translate this sentence.\nDone.", target_text="t", source_id="bad"
        )
        korean = TrainingPair(
            input_text="이 문장을 번역하세요.\nDone.", target_text="t", source_id="bad-ko"
        )
        hits = scan_for_directives(TrainingSet(pairs=(clean, dirty, korean)))
        assert [(h.source_id, h.phrase) for h in hits] == [("bad", "translate"), ("bad-ko", "번역")]

    def test_scan_is_case_insensitive(self):
        pair = TrainingPair(input_text="TRANSLATE me", target_text="t", source_id="x")
        assert scan_for_directives(TrainingSet(pairs=(pair,)))

    def test_custom_phrase_list(self):
        pair = TrainingPair(input_text="Summarize the text", target_text="t", source_id="x")
        hits = scan_for_directives(TrainingSet(pairs=(pair,)), phrases=("summarize",))
        assert hits and hits[0].phrase == "summarize"

    def test_targets_may_mention_directives(self):
        # only inputs are scanned: the translated side may legitimately differ
        pair = TrainingPair(input_text="clean", target_text="번역된 텍스트", source_id="x")
        assert scan_for_directives(TrainingSet(pairs=(pair,))) == []

    def test_summary_formats(self):
        assert directive_scan_summary([]) == "directive scan: clean (0 hits)"
        pair = TrainingPair(input_text="translate me", target_text="t", source_id="x")
        summary = directive_scan_summary(scan_for_directives(TrainingSet(pairs=(pair,))))
        assert "1 hit" in summary and "x" in summary

    def test_default_phrases(self):
        assert "translate" in DEFAULT_DIRECTIVE_PHRASES
        assert "번역" in DEFAULT_DIRECTIVE_PHRASES
