"""Command-line driver wiring the pipeline end to end.

Subcommands: sample | translate | assess | score | export. Behaviour comes
from one config file (``--config``) with flag overrides winning; every output
gets a ``<file>.meta.json`` sidecar echoing the effective configuration so a
run can be reproduced from its artifacts.

Exit codes: 0 success, 1 systemic failure (backend, auth, unexpected),
2 input or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import config as cfg
from .backends import CountingBackend
from .batching import BatchFailure
from .dataset import (
    category_counts,
    load_corpus,
    load_rules,
    sample_stratified,
    save_corpus,
)
from .errors import XlinstructError
from .export import (
    build_training_pairs,
    directive_scan_summary,
    export_training_set,
    import_training_set,
    scan_for_directives,
)
from .judging import (
    aggregate,
    assess_corpus,
    build_assessment_prompt,
    render_quality_report,
    save_assessments,
)
from .jsonl import write_jsonl
from .scoring import (
    corpus_bleu,
    external_score,
    gemba_score,
    load_scored_pairs,
    metric_report,
    render_metric_reports,
)
from .translation import (
    build_translation_prompt,
    load_translated_corpus,
    save_translated_corpus,
    segment_source,
    translate_corpus,
)

EXIT_OK = 0
EXIT_SYSTEMIC = 1
EXIT_INPUT = 2


def _write_sidecar(output: Path, command: str, config: cfg.PipelineConfig, **extra: Any) -> None:
    payload = {
        "command": command,
        "effective_config": cfg.effective_config(config),
        **extra,
    }
    sidecar = output.with_name(output.name + ".meta.json")
    sidecar.write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _load_pipeline_config(args: argparse.Namespace) -> cfg.PipelineConfig:
    config = cfg.load_config(args.config) if args.config else cfg.PipelineConfig()
    overrides: dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "max_in_flight", None) is not None:
        overrides["limits"] = dataclasses.replace(
            config.limits, max_in_flight=args.max_in_flight
        )
    if getattr(args, "backend_kind", None):
        overrides["backend"] = dataclasses.replace(config.backend, kind=args.backend_kind)
    return dataclasses.replace(config, **overrides) if overrides else config


def _failures_records(failures: Sequence[BatchFailure]) -> list[dict[str, Any]]:
    return [f.to_dict() for f in failures]


def cmd_sample(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args)
    corpus = load_corpus(args.corpus, strict=not args.lenient)
    if args.rules:
        from .dataset import categorize_corpus

        corpus = categorize_corpus(corpus, load_rules(args.rules))
    sampled = sample_stratified(corpus, args.per_category, config.seed)
    output = Path(args.output)
    save_corpus(sampled, output)
    _write_sidecar(output, "sample", config, sample_count=len(sampled))
    for category, count in sorted(category_counts(sampled).items(), key=lambda kv: kv[0].value):
        print(f"{category.value}: {count}")
    print(f"wrote {len(sampled)} samples to {output}")
    return EXIT_OK


def cmd_translate(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args)
    corpus = load_corpus(args.corpus)
    translation_config = cfg.translation_config(config)

    if args.dry_run:
        if not corpus.samples:
            print("corpus is empty; nothing to render")
            return EXIT_OK
        segmented = segment_source(corpus.samples[0])
        payload = build_translation_prompt(
            translation_config.source_language,
            translation_config.target_language,
            translation_config.target_people,
            segmented.segments,
            decoding=translation_config.decoding,
            attach_function=translation_config.use_function_calling,
        )
        print(payload.system_or_user_text)
        if payload.attached_function is not None:
            print()
            print(payload.attached_function.to_json())
        return EXIT_OK

    backend = CountingBackend(cfg.build_backend(config))
    checkpoint = args.checkpoint or (config.paths.checkpoint or None)
    translated = translate_corpus(corpus, backend, translation_config, checkpoint)
    output = Path(args.output)
    save_translated_corpus(translated, output)
    _write_sidecar(
        output,
        "translate",
        config,
        translated_count=len(translated.samples),
        failure_count=len(translated.failures),
        backend_requests=backend.calls,
    )
    if args.failures:
        write_jsonl(Path(args.failures), _failures_records(translated.failures))
    print(
        f"translated {len(translated.samples)}/{len(corpus)} samples "
        f"({len(translated.failures)} failed, {backend.calls} backend requests)"
    )
    for failure in translated.failures:
        print(f"  FAILED {failure.item_id}: {failure.error}: {failure.detail}")
    return EXIT_OK


def cmd_assess(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args)
    translated = load_translated_corpus(args.translated)

    if args.dry_run:
        if not translated.samples:
            print("translated corpus is empty; nothing to render")
            return EXIT_OK
        payload = build_assessment_prompt(translated.samples[0], config.decoding)
        print(payload.system_or_user_text)
        return EXIT_OK

    judge = CountingBackend(cfg.build_backend(config))
    batch = assess_corpus(translated, judge, cfg.judge_config(config), args.checkpoint)
    output = Path(args.output)
    save_assessments(batch.assessments, output)
    categories = {item.source.id: item.source.category for item in translated.samples}
    report = aggregate(batch.assessments, categories, unassessed=len(batch.failures))
    report_path = Path(args.report)
    report_path.write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    table = render_quality_report(report)
    if args.table:
        Path(args.table).write_text(table + "\n", encoding="utf-8")
    _write_sidecar(
        output,
        "assess",
        config,
        assessed_count=len(batch.assessments),
        unassessed_count=len(batch.failures),
        judge_requests=judge.calls,
    )
    print(table)
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args)
    pairs = load_scored_pairs(args.pairs)
    if not pairs:
        print("no pairs to score", file=sys.stderr)
        return EXIT_INPUT

    bleu = corpus_bleu(pairs, cfg.bleu_config(config))

    backend = CountingBackend(cfg.build_backend(config))
    gemba_batch = gemba_score(pairs, backend, cfg.gemba_config(config), args.checkpoint)
    gemba_values = [score for _pair_id, score in gemba_batch.scores]

    endpoint = cfg.scorer_endpoint(config)
    external_values = None
    if endpoint is not None:
        try:
            external_values = [v for _pair_id, v in external_score(pairs, endpoint)]
        except XlinstructError as exc:
            if args.require_external:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_SYSTEMIC
            print(f"warning: external scorer skipped: {exc}", file=sys.stderr)
    elif args.require_external:
        print("error: --require-external set but no external scorer configured", file=sys.stderr)
        return EXIT_SYSTEMIC

    report = metric_report(
        args.dataset_name,
        bleu,
        gemba_values,
        external=external_values,
        external_scale=config.metrics.external_scale,
    )
    output = Path(args.output)
    output.write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    table = render_metric_reports([report])
    if args.table:
        Path(args.table).write_text(table + "\n", encoding="utf-8")
    _write_sidecar(
        output,
        "score",
        config,
        pair_count=len(pairs),
        gemba_failures=len(gemba_batch.failures),
        backend_requests=backend.calls,
    )
    print(table)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args)
    translated = load_translated_corpus(args.translated)
    training_set = build_training_pairs(translated)
    output = Path(args.output)
    export_training_set(training_set, output, format=args.format)

    reimported = import_training_set(output, format=args.format)
    if reimported.pairs != training_set.pairs:
        print("error: export round-trip mismatch", file=sys.stderr)
        return EXIT_SYSTEMIC

    hits = scan_for_directives(training_set, config.directive_phrases)
    _write_sidecar(
        output,
        "export",
        config,
        pair_count=len(training_set),
        directive_hits=len(hits),
    )
    print(f"wrote {len(training_set)} training pairs to {output} ({args.format})")
    print(directive_scan_summary(hits))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlinstruct",
        description="Translate instruction corpora, judge quality, score, and export training pairs.",
    )
    parser.add_argument("--config", help="pipeline config file (JSON or YAML)")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument(
        "--max-in-flight", type=int, default=None, help="override concurrent backend calls"
    )
    parser.add_argument(
        "--backend-kind", default=None, choices=("mock", "openai_chat"), help="override backend"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="stratified sample per task category")
    p_sample.add_argument("--corpus", required=True)
    p_sample.add_argument("--output", required=True)
    p_sample.add_argument("--per-category", type=int, default=30)
    p_sample.add_argument("--rules", help="re-categorize via this rule table first")
    p_sample.add_argument("--lenient", action="store_true", help="skip malformed lines")
    p_sample.set_defaults(func=cmd_sample)

    p_translate = sub.add_parser("translate", help="translate a corpus via the sentence-array protocol")
    p_translate.add_argument("--corpus", required=True)
    p_translate.add_argument("--output", required=True)
    p_translate.add_argument("--checkpoint")
    p_translate.add_argument("--failures", help="write failure report here")
    p_translate.add_argument("--dry-run", action="store_true", help="print the first payload and exit")
    p_translate.set_defaults(func=cmd_translate)

    p_assess = sub.add_parser("assess", help="judge translation quality sample by sample")
    p_assess.add_argument("--translated", required=True)
    p_assess.add_argument("--output", required=True, help="assessment records file")
    p_assess.add_argument("--report", required=True, help="aggregated report (JSON)")
    p_assess.add_argument("--table", help="aligned text table output")
    p_assess.add_argument("--checkpoint")
    p_assess.add_argument("--dry-run", action="store_true")
    p_assess.set_defaults(func=cmd_assess)

    p_score = sub.add_parser("score", help="BLEU + judged score (+ external metric) report")
    p_score.add_argument("--pairs", required=True, help="evaluation records file")
    p_score.add_argument("--dataset-name", default="dataset")
    p_score.add_argument("--output", required=True, help="metric report (JSON)")
    p_score.add_argument("--table", help="aligned text table output")
    p_score.add_argument("--checkpoint")
    p_score.add_argument("--require-external", action="store_true")
    p_score.set_defaults(func=cmd_score)

    p_export = sub.add_parser("export", help="build and export fine-tuning pairs")
    p_export.add_argument("--translated", required=True)
    p_export.add_argument("--output", required=True)
    p_export.add_argument("--format", default="pair_records", choices=("pair_records", "chat_records"))
    p_export.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (cfg.ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SYSTEMIC
    except XlinstructError as exc:
        kind = type(exc).__name__
        print(f"error ({kind}): {exc}", file=sys.stderr)
        # Input-shaped problems exit 2; backend/systemic problems exit 1.
        from .errors import (
            DuplicateId,
            EmptyCorpus,
            EmptyInput,
            InsufficientSamples,
            InvalidPattern,
            MalformedRecord,
            MissingCategory,
        )

        if isinstance(
            exc,
            (
                DuplicateId,
                EmptyCorpus,
                EmptyInput,
                InsufficientSamples,
                InvalidPattern,
                MalformedRecord,
                MissingCategory,
            ),
        ):
            return EXIT_INPUT
        return EXIT_SYSTEMIC


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
