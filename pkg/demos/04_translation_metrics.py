"""Score translations: native corpus BLEU, a judged 0-100 metric, and the
combined per-dataset report.

BLEU is computed from first principles (clipped n-gram precisions, brevity
penalty); the judged metric prompts a backend per pair; the report averages
whatever metrics are present, rescaling 0-1 external scores to 0-100.
"""

from xlinstruct import (
    BleuConfig,
    GembaConfig,
    MockBackend,
    ScoredPair,
    build_gemba_prompt,
    corpus_bleu,
    gemba_score,
    metric_report,
    render_metric_reports,
)

PAIRS = [
    ScoredPair(
        id="p1",
        source_text="The cat sat on the mat.",
        hypothesis="고양이가 매트 위에 앉아 있었다.",
        reference="고양이가 매트 위에 앉았다.",
    ),
    ScoredPair(
        id="p2",
        source_text="Water boils at one hundred degrees.",
        hypothesis="물은 100도에서 끓는다.",
        reference="물은 100도에서 끓는다.",
    ),
    ScoredPair(
        id="p3",
        source_text="Seoul is a large city.",
        hypothesis="서울은 큰 도시다.",
        reference="서울은 아주 큰 도시이다.",
    ),
]


def main() -> None:
    # 1. Whitespace BLEU under-segments Korean; the character tokenizer is
    #    the honest mode for it, and the report stamps whichever was used.
    for tokenizer in ("whitespace", "character"):
        bleu = corpus_bleu(PAIRS, BleuConfig(tokenizer=tokenizer))
        print(f"BLEU[{tokenizer:10s}] = {bleu.score:6.2f}  "
              f"(precisions {tuple(round(p, 3) for p in bleu.ngram_precisions)}, "
              f"BP {bleu.brevity_penalty:.3f})")

    # 2. The judged-metric prompt for one pair.
    print("\n--- judged-score prompt for p1 ---")
    print(build_gemba_prompt(PAIRS[0], "English", "Korean").system_or_user_text)

    # 3. Judge every pair with a deterministic offline backend.
    batch = gemba_score(PAIRS, MockBackend(), GembaConfig())
    print("\nper-pair judged scores:", batch.scores)

    # 4. Combine into the per-dataset block. An external scorer would plug in
    #    as a third column (HTTP endpoint or subprocess, see ScorerEndpoint).
    bleu = corpus_bleu(PAIRS, BleuConfig(tokenizer="character"))
    report = metric_report("demo_dataset", bleu, [s for _id, s in batch.scores])
    print()
    print(render_metric_reports([report]))


if __name__ == "__main__":
    main()
