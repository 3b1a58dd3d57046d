from __future__ import annotations

import random

import pytest

from xlinstruct.backends import MockBackend, ScriptedBackend, TextResponse, payload_digest
from xlinstruct.dataset import TaskCategory
from xlinstruct.errors import EmptyInput, EmptySample, MissingCategory, ScoreNotFound
from xlinstruct.judging import (
    JudgeConfig,
    QualityAssessment,
    aggregate,
    aggregate_from_category_averages,
    assess_corpus,
    assess_sample,
    build_assessment_prompt,
    load_assessments,
    parse_assessment,
    render_quality_report,
    save_assessments,
)
from xlinstruct.translation import (
    TranslatedCorpus,
    TranslatedSample,
    TranslationConfig,
    translate_corpus,
)

from .conftest import FIXTURES, make_corpus, make_sample
from .reference_rows import QUALITY_SURVEY_PRELIMINARY


def make_translated(sample=None, instruction="지시문", response="답변") -> TranslatedSample:
    sample = sample or make_sample()
    return TranslatedSample(
        source=sample,
        translated_segments=(instruction, response),
        instruction_segment_count=1,
        translated_instruction=instruction,
        translated_response=response,
        backend_id="mock",
        attempts=1,
        target_language="Korean",
    )


def make_translated_corpus(n=6) -> TranslatedCorpus:
    corpus = make_corpus(n)
    return translate_corpus(corpus, MockBackend(mode="tag"), TranslationConfig(backoff_base=0))


class TestAssessmentPrompt:
    def test_contains_both_scale_sentences(self):
        text = build_assessment_prompt(make_translated()).system_or_user_text
        assert "no instruction or no output" in text
        assert "no meaningful information" in text
        assert text.endswith("Completeness Score (0-100):")

    def test_multiline_response_preserved_in_slot(self):
        translated = make_translated(instruction="질문", response="첫 줄\n둘째 줄")
        text = build_assessment_prompt(translated).system_or_user_text
        assert 'target: "질문\n\n첫 줄\n둘째 줄"' in text

    def test_matches_fixture(self):
        src = make_sample(
            sample_id="fx1", instruction="Fix this:\nHe go to school.",
            response="He goes to school.",
        )
        translated = TranslatedSample(
            source=src,
            translated_segments=("고쳐줘:", "He go to school.", "He goes to school."),
            instruction_segment_count=2,
            translated_instruction="고쳐줘:\nHe go to school.",
            translated_response="He goes to school.",
            backend_id="m",
            attempts=1,
            target_language="Korean",
        )
        rendered = build_assessment_prompt(translated).system_or_user_text + "\n"
        assert rendered == (FIXTURES / "assessment_prompt.txt").read_text(encoding="utf-8")

    def test_empty_fields_rejected(self):
        with pytest.raises(EmptySample):
            build_assessment_prompt(make_translated(instruction="  "))


class TestParseAssessment:
    def test_standard_reply(self):
        text = (
            "Completeness Score (0-100): 85\nBoth parts are present.\n"
            "Informativeness Score (0-100): 70\nMost content survives."
        )
        parsed = parse_assessment(text, "s1")
        assert (parsed.completeness, parsed.informativeness) == (85.0, 70.0)
        assert parsed.completeness_rationale == "Both parts are present."
        assert parsed.informativeness_rationale == "Most content survives."
        assert not parsed.clamped

    def test_out_of_range_clamped_with_flag(self):
        text = "Completeness Score: 150 too generous\nInformativeness Score: 40"
        parsed = parse_assessment(text, "s1")
        assert parsed.completeness == 100.0
        assert parsed.clamped

    def test_negative_clamped(self):
        text = "Completeness Score: -5\nInformativeness Score: 40"
        assert parse_assessment(text, "s1").completeness == 0.0

    def test_missing_informativeness_label(self):
        with pytest.raises(ScoreNotFound) as err:
            parse_assessment("Completeness Score: 80\nno second label here", "s1")
        assert "Informativeness" in err.value.label

    def test_case_insensitive_labels_and_decimals(self):
        text = "completeness score (0-100): 87.5 ...\ninformativeness score: 66.25"
        parsed = parse_assessment(text, "s1")
        assert (parsed.completeness, parsed.informativeness) == (87.5, 66.25)

    def test_scale_parenthetical_is_not_the_score(self):
        text = "Completeness Score (0-100):\n92\nInformativeness Score (0-100):\n81"
        parsed = parse_assessment(text, "s1")
        assert (parsed.completeness, parsed.informativeness) == (92.0, 81.0)


class TestAssessCorpus:
    def test_fixed_judge_gives_fixed_scores(self):
        translated = make_translated_corpus(5)
        reply = TextResponse("Completeness Score (0-100): 85\nInformativeness Score (0-100): 70")
        script = {}
        for item in translated.samples:
            payload = build_assessment_prompt(item, JudgeConfig().decoding)
            script[payload_digest(payload)] = [reply]
        judge = ScriptedBackend(script)
        batch = assess_corpus(translated, judge, JudgeConfig(backoff_base=0))
        assert [a.sample_id for a in batch.assessments] == [s.source.id for s in translated.samples]
        assert all(a.completeness == 85.0 and a.informativeness == 70.0 for a in batch.assessments)

    def test_order_preserved_and_deterministic_under_concurrency(self):
        translated = make_translated_corpus(12)
        judge = MockBackend()
        serial = assess_corpus(translated, judge, JudgeConfig(max_in_flight=1, backoff_base=0))
        threaded = assess_corpus(translated, judge, JudgeConfig(max_in_flight=6, backoff_base=0))
        assert serial.assessments == threaded.assessments

    def test_resume_assesses_only_missing_ids(self, tmp_path):
        translated = make_translated_corpus(8)
        checkpoint = tmp_path / "judge-ck.jsonl"
        half = TranslatedCorpus(
            samples=translated.samples[:4],
            failures=(),
            target_language=translated.target_language,
            backend_id=translated.backend_id,
        )
        from xlinstruct.backends import CountingBackend

        judge1 = CountingBackend(MockBackend())
        assess_corpus(half, judge1, JudgeConfig(backoff_base=0), checkpoint)
        assert judge1.calls == 4
        judge2 = CountingBackend(MockBackend())
        batch = assess_corpus(translated, judge2, JudgeConfig(backoff_base=0), checkpoint)
        assert judge2.calls == 4
        assert len(batch.assessments) == 8

    def test_unparseable_judge_recorded_as_failure(self):
        translated = make_translated_corpus(3)
        bad = TextResponse("I refuse to grade this.")
        script = {
            payload_digest(build_assessment_prompt(item, JudgeConfig().decoding)): [bad]
            for item in translated.samples[:1]
        }
        judge = ScriptedBackend(script, fallback=MockBackend())
        batch = assess_corpus(translated, judge, JudgeConfig(max_retries=1, backoff_base=0))
        assert len(batch.assessments) == 2
        assert len(batch.failures) == 1
        assert batch.failures[0].item_id == translated.samples[0].source.id


def assessment(sample_id, completeness, informativeness):
    return QualityAssessment(
        sample_id=sample_id, completeness=completeness, informativeness=informativeness
    )


def spread_assessments(row):
    """One synthetic assessment per category carrying that category's average."""
    categories = {}
    items = []
    for i, category in enumerate(TaskCategory):
        sid = f"s{i}"
        categories[sid] = category
        items.append(assessment(sid, row.completeness[i], row.informativeness[i]))
    return items, categories


class TestAggregate:
    @pytest.mark.parametrize("row", QUALITY_SURVEY_PRELIMINARY, ids=lambda r: r.name)
    def test_survey_rows_reproduced(self, row):
        items, categories = spread_assessments(row)
        report = aggregate(items, categories)
        assert report.avg_completeness == pytest.approx(row.avg_completeness, abs=0.01)
        assert report.avg_informativeness == pytest.approx(row.avg_informativeness, abs=0.01)
        assert report.ratio_percent == pytest.approx(row.ratio_percent, abs=0.01)

    def test_all_hundreds(self):
        items = [assessment(f"s{i}", 100.0, 100.0) for i in range(8)]
        categories = {f"s{i}": list(TaskCategory)[i % 4] for i in range(8)}
        report = aggregate(items, categories)
        assert report.avg_completeness == 100.0
        assert report.avg_informativeness == 100.0
        assert report.ratio_percent == pytest.approx(100.0)

    def test_overall_is_mean_of_category_means_not_sample_mean(self):
        # two categories with different sizes: 1 sample at 100 vs 3 at 50
        items = [assessment("a", 100, 100)] + [assessment(f"b{i}", 50, 50) for i in range(3)]
        categories = {"a": TaskCategory.CODE}
        categories.update({f"b{i}": TaskCategory.OTHERS for i in range(3)})
        report = aggregate(items, categories)
        assert report.avg_completeness == pytest.approx(75.0)  # not 62.5

    def test_missing_category_raises(self):
        with pytest.raises(MissingCategory):
            aggregate([assessment("ghost", 50, 50)], {})

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            aggregate([], {})

    def test_permutation_invariance(self):
        rng = random.Random(5)
        items = [assessment(f"s{i}", rng.uniform(0, 100), rng.uniform(0, 100)) for i in range(20)]
        categories = {f"s{i}": list(TaskCategory)[i % 4] for i in range(20)}
        base = aggregate(items, categories)
        shuffled = items[:]
        rng.shuffle(shuffled)
        again = aggregate(shuffled, categories)
        assert again == base

    def test_ratio_scale_covariance(self):
        rng = random.Random(11)
        items = [assessment(f"s{i}", rng.uniform(10, 100), rng.uniform(10, 90)) for i in range(12)]
        categories = {f"s{i}": list(TaskCategory)[i % 4] for i in range(12)}
        base = aggregate(items, categories)
        k = 0.5
        scaled_items = [
            assessment(a.sample_id, a.completeness, a.informativeness * k) for a in items
        ]
        scaled = aggregate(scaled_items, categories)
        assert scaled.ratio_percent == pytest.approx(base.ratio_percent * k, rel=1e-12)

    def test_zero_completeness_gives_zero_ratio(self):
        items = [assessment("a", 0, 50)]
        report = aggregate(items, {"a": TaskCategory.OTHERS})
        assert report.ratio_percent == 0.0

    def test_ratio_is_exactly_ratio_of_report_averages(self):
        rng = random.Random(23)
        items = [assessment(f"s{i}", rng.uniform(1, 100), rng.uniform(1, 100)) for i in range(9)]
        categories = {f"s{i}": list(TaskCategory)[i % 3] for i in range(9)}
        report = aggregate(items, categories)
        assert report.ratio_percent == 100.0 * report.avg_informativeness / report.avg_completeness

    def test_category_average_helper(self):
        avg_c, avg_i, ratio = aggregate_from_category_averages(
            (62.50, 50.67, 80.83, 83.67), (50.83, 50.00, 88.33, 77.50)
        )
        assert avg_c == pytest.approx(69.42, abs=0.01)
        assert avg_i == pytest.approx(66.67, abs=0.01)
        assert ratio == pytest.approx(96.04, abs=0.01)


def test_render_quality_report_layout():
    items, categories = spread_assessments(QUALITY_SURVEY_PRELIMINARY[0])
    table = render_quality_report(aggregate(items, categories))
    lines = table.split("\n")
    assert "C:Correction" in lines[0] and "Ratio(%)" in lines[0]
    assert "69.42" in lines[1] and "96.03" in lines[1] or "96.04" in lines[1]


def test_assessments_file_round_trip(tmp_path):
    items = [
        QualityAssessment("a", 85, 70, "fine", "ok", False),
        QualityAssessment("b", 100, 100, "", "", True),
    ]
    path = tmp_path / "assessments.jsonl"
    save_assessments(items, path)
    assert load_assessments(path) == items


def test_assess_sample_retries_on_score_not_found(fast_config):
    translated = make_translated()
    payload = build_assessment_prompt(translated, JudgeConfig().decoding)
    script = {
        payload_digest(payload): [
            TextResponse("no scores here"),
            TextResponse("Completeness Score: 90\nInformativeness Score: 80"),
        ]
    }
    judge = ScriptedBackend(script)
    result = assess_sample(translated, judge, JudgeConfig(backoff_base=0))
    assert (result.completeness, result.informativeness) == (90.0, 80.0)
