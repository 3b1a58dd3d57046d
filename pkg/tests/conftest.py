from __future__ import annotations

import random
from pathlib import Path

import pytest

from xlinstruct.backends import DecodingConfig, MockBackend
from xlinstruct.dataset import Corpus, InstructionSample, TaskCategory, load_corpus
from xlinstruct.translation import TranslationConfig

FIXTURES = Path(__file__).parent / "fixtures"
DATA = Path(__file__).parent / "data"


@pytest.fixture
def fixture_corpus_path() -> Path:
    return DATA / "fixture_corpus.jsonl"


@pytest.fixture
def fixture_corpus(fixture_corpus_path) -> Corpus:
    return load_corpus(fixture_corpus_path)


@pytest.fixture
def mock_backend() -> MockBackend:
    return MockBackend(mode="tag", tag="ko")


@pytest.fixture
def fast_config() -> TranslationConfig:
    # backoff zeroed so retry tests don't sleep
    return TranslationConfig(backoff_base=0.0, decoding=DecodingConfig())


def make_sample(
    sample_id: str = "s1",
    instruction: str = "Fix this:\nHe go.",
    input_text: str = "",
    response: str = "He goes.",
    category: TaskCategory = TaskCategory.CORRECTION,
) -> InstructionSample:
    return InstructionSample(
        id=sample_id,
        instruction=instruction,
        input=input_text,
        response=response,
        category=category,
    )


def make_corpus(n: int, seed: int = 7) -> Corpus:
    """Small synthetic corpus cycling through categories, with newlines."""
    rng = random.Random(seed)
    samples = []
    categories = list(TaskCategory)
    for i in range(n):
        lines = ["line %d-%d" % (i, j) for j in range(rng.randint(1, 3))]
        samples.append(
            InstructionSample(
                id=f"id-{i:03d}",
                instruction="\n".join(lines) or f"instruction {i}",
                input="extra context" if i % 3 == 0 else "",
                response=f"response {i}\nsecond line" if i % 2 else f"response {i}",
                category=categories[i % len(categories)],
            )
        )
    return Corpus(samples=tuple(samples))
