"""Published aggregation cross-check data.

Each quality row pairs the four per-category completeness and informativeness
averages of one translator with the derived columns as they were reported
(Avg C, Avg I, Ratio percent). Each metric row pairs three reported metric
values (BLEU, external, judged) with the reported Avg column. The aggregation
code must reproduce the derived columns from the cells within +/-0.01.

Known inconsistencies in the source material (ratio column only):
- tower_base: reported ratio 100.04 but its own cells give 104.33;
- tower_instruct: reported ratio 98.16 but its own cells give 98.19.
The cells themselves and every Avg column are self-consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

CATEGORY_ORDER = ("Correction", "Rephrase", "Code", "Others")


@dataclass(frozen=True)
class QualityRow:
    name: str
    completeness: tuple[float, float, float, float]
    informativeness: tuple[float, float, float, float]
    avg_completeness: float
    avg_informativeness: float
    ratio_percent: float


# Preliminary four-translator survey.
QUALITY_SURVEY_PRELIMINARY = (
    QualityRow("gpt4", (62.50, 50.67, 80.83, 83.67), (50.83, 50.00, 88.33, 77.50), 69.42, 66.67, 96.04),
    QualityRow("gpt35", (48.83, 55.00, 80.83, 76.00), (41.17, 49.33, 88.33, 74.83), 65.17, 63.42, 97.31),
    QualityRow("google", (75.00, 82.00, 82.83, 89.00), (51.33, 72.00, 79.00, 82.00), 82.21, 71.08, 86.46),
    QualityRow("papago", (75.50, 78.00, 67.50, 87.83), (53.33, 67.33, 65.50, 81.00), 77.21, 66.79, 86.50),
)

# Full twelve-translator survey.
QUALITY_SURVEY_FULL = (
    QualityRow("gpt4_prompted", (87.67, 89.83, 80.83, 89.50), (71.83, 78.50, 88.67, 83.17), 86.96, 80.54, 92.62),
    QualityRow("gpt35_prompted", (86.00, 78.83, 81.00, 82.00), (66.00, 68.50, 88.50, 78.83), 81.96, 75.46, 92.07),
    QualityRow("gpt4", (62.50, 50.67, 80.83, 83.67), (50.83, 50.00, 88.33, 77.50), 69.42, 66.67, 96.04),
    QualityRow("gpt35", (48.83, 55.00, 80.83, 76.00), (41.17, 49.33, 88.33, 74.83), 65.17, 63.42, 97.31),
    QualityRow("gemini", (81.17, 85.83, 68.33, 88.67), (60.83, 74.33, 88.00, 80.83), 81.00, 76.00, 93.83),
    QualityRow("ft_translator", (83.00, 84.83, 84.17, 89.50), (69.33, 72.67, 88.67, 82.33), 85.38, 78.25, 91.65),
    QualityRow("ft_translator_base", (78.50, 83.67, 75.17, 90.17), (57.00, 74.50, 88.33, 83.00), 81.88, 75.71, 92.46),
    QualityRow("tower_base", (39.17, 24.33, 38.60, 57.33), (31.50, 30.00, 51.00, 53.84), 39.86, 41.58, 100.04),
    QualityRow("tower_instruct", (26.67, 31.00, 26.00, 44.83), (25.67, 30.50, 27.67, 42.33), 32.13, 31.54, 98.16),
    QualityRow("deepl", (73.50, 81.00, 79.17, 88.33), (55.67, 71.00, 79.67, 82.50), 80.50, 72.21, 89.70),
    QualityRow("google", (75.00, 82.00, 82.83, 89.00), (51.33, 72.00, 79.00, 82.00), 82.21, 71.08, 86.46),
    QualityRow("papago", (75.50, 78.00, 67.50, 87.83), (53.33, 67.33, 65.50, 81.00), 77.21, 66.79, 86.50),
)

RATIO_INCONSISTENT_ROWS = {"tower_base", "tower_instruct"}


@dataclass(frozen=True)
class MetricRow:
    translator: str
    dataset: str
    bleu: float
    external: float
    gemba: float
    avg: float


# Ten translators x three Korean benchmark datasets.
METRIC_SURVEY = (
    MetricRow("gpt4_prompted", "ko_arc", 56.60, 82.93, 89.75, 76.43),
    MetricRow("gpt4_prompted", "ko_mmlu", 49.50, 84.50, 89.51, 74.50),
    MetricRow("gpt4_prompted", "ko_truthfulqa", 53.90, 87.56, 88.40, 76.62),
    MetricRow("gpt35_prompted", "ko_arc", 51.40, 83.71, 89.70, 74.94),
    MetricRow("gpt35_prompted", "ko_mmlu", 39.80, 83.69, 86.88, 70.12),
    MetricRow("gpt35_prompted", "ko_truthfulqa", 45.10, 86.52, 87.67, 73.10),
    MetricRow("gpt4", "ko_arc", 56.10, 85.28, 93.35, 78.24),
    MetricRow("gpt4", "ko_mmlu", 42.40, 83.72, 90.38, 72.17),
    MetricRow("gpt4", "ko_truthfulqa", 63.20, 90.61, 92.29, 82.03),
    MetricRow("gpt35", "ko_arc", 24.10, 74.50, 84.49, 61.03),
    MetricRow("gpt35", "ko_mmlu", 30.30, 78.87, 77.01, 62.06),
    MetricRow("gpt35", "ko_truthfulqa", 38.00, 82.89, 76.99, 65.96),
    MetricRow("gemini", "ko_arc", 59.00, 85.94, 92.20, 79.05),
    MetricRow("gemini", "ko_mmlu", 46.20, 83.80, 85.85, 71.95),
    MetricRow("gemini", "ko_truthfulqa", 40.10, 72.45, 77.02, 63.19),
    MetricRow("ft_translator", "ko_arc", 50.80, 81.23, 85.29, 72.44),
    MetricRow("ft_translator", "ko_mmlu", 45.60, 82.88, 85.65, 71.38),
    MetricRow("ft_translator", "ko_truthfulqa", 52.80, 87.69, 84.31, 74.93),
    MetricRow("ft_translator_base", "ko_arc", 53.30, 82.68, 87.24, 74.41),
    MetricRow("ft_translator_base", "ko_mmlu", 46.10, 83.04, 86.45, 71.86),
    MetricRow("ft_translator_base", "ko_truthfulqa", 54.80, 88.49, 86.73, 76.67),
    MetricRow("tower_base", "ko_arc", 38.80, 79.01, 76.88, 64.90),
    MetricRow("tower_base", "ko_mmlu", 28.40, 77.50, 64.07, 56.66),
    MetricRow("tower_base", "ko_truthfulqa", 19.80, 83.39, 61.22, 54.80),
    MetricRow("tower_instruct", "ko_arc", 22.10, 72.90, 63.09, 52.70),
    MetricRow("tower_instruct", "ko_mmlu", 16.20, 70.88, 56.73, 47.94),
    MetricRow("tower_instruct", "ko_truthfulqa", 19.20, 66.58, 56.24, 47.34),
    MetricRow("deepl", "ko_arc", 58.40, 86.56, 91.66, 78.87),
    MetricRow("deepl", "ko_mmlu", 47.60, 85.47, 80.05, 71.04),
    MetricRow("deepl", "ko_truthfulqa", 55.40, 89.34, 82.21, 75.65),
    MetricRow("google", "ko_arc", 52.50, 83.39, 89.67, 75.19),
    MetricRow("google", "ko_mmlu", 43.80, 82.53, 85.33, 70.55),
    MetricRow("google", "ko_truthfulqa", 51.10, 85.25, 82.08, 72.81),
    MetricRow("papago", "ko_arc", 43.50, 81.03, 81.76, 68.76),
    MetricRow("papago", "ko_mmlu", 39.20, 81.76, 81.92, 67.63),
    MetricRow("papago", "ko_truthfulqa", 42.40, 84.93, 79.77, 69.03),
)
