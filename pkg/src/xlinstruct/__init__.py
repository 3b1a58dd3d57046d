"""xlinstruct: translate instruction corpora with an LLM sentence-array
protocol, judge the result, score it, and export fine-tuning pairs."""

from .backends import (
    ChatBackend,
    CountingBackend,
    DecodingConfig,
    FunctionCallResponse,
    FunctionSchema,
    HttpChatBackend,
    MockBackend,
    PromptPayload,
    ScriptedBackend,
    TextResponse,
    payload_digest,
)
from .dataset import (
    Corpus,
    InstructionSample,
    TaskCategory,
    categorize,
    categorize_corpus,
    default_rules,
    load_corpus,
    load_rules,
    render_instruction_text,
    sample_stratified,
    save_corpus,
)
from .export import (
    TrainingPair,
    TrainingSet,
    build_training_pairs,
    export_training_set,
    import_training_set,
    scan_for_directives,
)
from .judging import (
    AssessmentBatch,
    JudgeConfig,
    QualityAssessment,
    QualityReport,
    aggregate,
    aggregate_from_category_averages,
    assess_corpus,
    build_assessment_prompt,
    parse_assessment,
    render_quality_report,
)
from .scoring import (
    BleuConfig,
    BleuScore,
    GembaConfig,
    MetricReport,
    ScoredPair,
    ScorerEndpoint,
    build_gemba_prompt,
    corpus_bleu,
    external_score,
    gemba_score,
    metric_report,
    parse_score_0_100,
    render_metric_reports,
)
from .segmenting import SegmentedSample, reassemble, segment_pair, segment_text
from .translation import (
    TranslatedCorpus,
    TranslatedSample,
    TranslationConfig,
    build_function_schema,
    build_translation_prompt,
    load_translated_corpus,
    parse_function_response,
    save_translated_corpus,
    translate_corpus,
    translate_sample,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
