"""Turn a translated corpus into trainer-ready pairs.

Each pair maps the rendered English sample to its full translated text with
no translation directive anywhere in the input; the exported metadata pins
loss masking to target tokens only. A configurable directive scan guards the
contract and reports (never drops) anything suspicious.
"""

from pathlib import Path
from tempfile import TemporaryDirectory

from xlinstruct import (
    MockBackend,
    TranslationConfig,
    build_training_pairs,
    export_training_set,
    import_training_set,
    scan_for_directives,
    translate_corpus,
)
from xlinstruct.dataset import load_corpus
from xlinstruct.export import directive_scan_summary

FIXTURE_CORPUS = Path(__file__).parent.parent / "tests" / "data" / "fixture_corpus.jsonl"


def main() -> None:
    corpus = load_corpus(FIXTURE_CORPUS)
    translated = translate_corpus(corpus, MockBackend(mode="tag", tag="ko"), TranslationConfig())

    training_set = build_training_pairs(translated)
    first = training_set.pairs[0]
    print("--- first training pair ---")
    print("input (English sample, no directive):")
    print("  " + first.input_text.replace("\n", "\n  "))
    print("target (translated text):")
    print("  " + first.target_text.replace("\n", "\n  "))
    print("\nmetadata:", training_set.metadata)

    hits = scan_for_directives(training_set)
    print("\n" + directive_scan_summary(hits))

    with TemporaryDirectory() as tmp:
        for format_name in ("pair_records", "chat_records"):
            path = Path(tmp) / f"train.{format_name}.jsonl"
            export_training_set(training_set, path, format=format_name)
            reimported = import_training_set(path, format=format_name)
            assert reimported.pairs == training_set.pairs
            print(f"{format_name}: wrote {len(training_set)} records to {path.name}, "
                  f"round-trip OK (sidecar: {path.name}.meta.json)")


if __name__ == "__main__":
    main()
