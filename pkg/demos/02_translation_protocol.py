"""The sentence-array translation protocol, end to end against a mock backend.

Shows the three moving parts: newline segmentation with a recorded
instruction/response boundary, the rendered prompt plus the attached
function definition, and the length-checked parse that makes omissions
impossible. Finishes with a corpus-scale run that writes a resumable
checkpoint.
"""

from pathlib import Path
from tempfile import TemporaryDirectory

from xlinstruct import (
    InstructionSample,
    MockBackend,
    TaskCategory,
    TranslationConfig,
    build_function_schema,
    build_translation_prompt,
    translate_corpus,
    translate_sample,
)
from xlinstruct.dataset import Corpus
from xlinstruct.translation import segment_source

SAMPLE = InstructionSample(
    id="proto-01",
    instruction="Correct the grammatical errors in this sentence.",
    input="He go to school every day.",
    response="He goes to school every day.",
    category=TaskCategory.CORRECTION,
)


def main() -> None:
    # 1. Segmentation: instruction (+ blank line + input) and response are
    #    split on newlines into one array with a recorded boundary.
    segmented = segment_source(SAMPLE)
    print("segments:", list(segmented.segments))
    print("instruction boundary:", segmented.instruction_segment_count)

    # 2. The prompt carries the whole array; the function definition forces
    #    the reply into a translated-sentence array of the same length.
    payload = build_translation_prompt("English", "Korean", "Koreans", segmented.segments)
    print("\n--- prompt ---")
    print(payload.system_or_user_text)
    print("\n--- attached function ---")
    print(build_function_schema("Korean").to_json())

    # 3. One sample through a deterministic offline backend.
    backend = MockBackend(mode="tag", tag="ko")
    config = TranslationConfig(target_language="Korean")
    result = translate_sample(SAMPLE, backend, config)
    print("\ntranslated instruction:", result.translated_instruction.replace("\n", " / "))
    print("translated response:   ", result.translated_response)
    print("attempts:", result.attempts)

    # 4. Corpus scale: failures are collected, completions are checkpointed
    #    in corpus order, and a rerun skips everything already done.
    corpus = Corpus(samples=(SAMPLE,) * 1 + tuple(
        InstructionSample(
            id=f"proto-{i:02d}",
            instruction=f"Line one of task {i}.\nLine two of task {i}.",
            input="",
            response=f"Answer {i}.",
            category=TaskCategory.OTHERS,
        )
        for i in range(2, 6)
    ))
    with TemporaryDirectory() as tmp:
        checkpoint = Path(tmp) / "translate.ck"
        first = translate_corpus(corpus, backend, config, checkpoint)
        print(f"\nfirst run: {len(first.samples)} translated, checkpoint has "
              f"{len(checkpoint.read_text().splitlines())} records")
        rerun = translate_corpus(corpus, backend, config, checkpoint)
        print(f"rerun: everything reused from the checkpoint, "
              f"{len(rerun.samples)} samples, {len(rerun.failures)} failures")


if __name__ == "__main__":
    main()
