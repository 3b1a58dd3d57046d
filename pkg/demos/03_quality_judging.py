"""Judge translated samples for completeness and informativeness.

A judge backend scores each sample on two 0-100 scales; the aggregator then
produces the per-category table: average completeness, average
informativeness, and the informativeness-to-completeness ratio, which is the
tell for instruction-aware translation (high ratio = intent preserved
whenever the translation was complete).
"""

from xlinstruct import (
    JudgeConfig,
    MockBackend,
    TranslationConfig,
    aggregate,
    assess_corpus,
    build_assessment_prompt,
    parse_assessment,
    render_quality_report,
    translate_corpus,
)
from xlinstruct.dataset import load_corpus
from pathlib import Path

FIXTURE_CORPUS = Path(__file__).parent.parent / "tests" / "data" / "fixture_corpus.jsonl"


def main() -> None:
    corpus = load_corpus(FIXTURE_CORPUS)
    translated = translate_corpus(
        corpus, MockBackend(mode="tag", tag="ko"), TranslationConfig()
    )

    # 1. The judge prompt for one sample.
    print("--- judge prompt for the first sample ---")
    print(build_assessment_prompt(translated.samples[0]).system_or_user_text)

    # 2. The reply parser is label-anchored and clamps out-of-range scores.
    reply = (
        "Completeness Score (0-100): 85\n"
        "Both instruction and output survive.\n"
        "Informativeness Score (0-100): 70\n"
        "Minor nuance lost in one clause."
    )
    parsed = parse_assessment(reply, "demo")
    print(f"\nparsed: completeness={parsed.completeness}, informativeness={parsed.informativeness}")
    print(f"rationales: {parsed.completeness_rationale!r} / {parsed.informativeness_rationale!r}")

    # 3. Corpus-scale assessment under the shared batch contract.
    judge = MockBackend()
    batch = assess_corpus(translated, judge, JudgeConfig(max_in_flight=4))
    print(f"\nassessed {len(batch.assessments)} samples ({len(batch.failures)} failures)")

    # 4. The aggregated table.
    categories = {item.source.id: item.source.category for item in translated.samples}
    report = aggregate(batch.assessments, categories)
    print()
    print(render_quality_report(report))


if __name__ == "__main__":
    main()
