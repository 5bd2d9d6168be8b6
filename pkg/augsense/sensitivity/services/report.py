import csv
import logging
from pathlib import Path
from typing import List, Sequence

from ..constants import (
    AUGMENTATION_NAMES,
    INTERCEPTS_FILENAME,
    METRICS,
    N_AUGMENTATIONS,
    REPORT_FILENAME,
    SERIES_FILENAME,
)
from ..models import MetricsRow
from ..utils import format_float
from .analysis import Analysis
from .metrics import classify, least_sensitive, most_sensitive

logger = logging.getLogger(__name__)

RANKING_SIZE = 3


def write_series_files(analysis: Analysis, out_dir) -> List[Path]:
    """
    Ряды нормализованных коэффициентов по моделям: строка на аугментацию,
    столбец на настройку гиперпараметров
    """
    out_dir = Path(out_dir)
    labels = analysis.hyperparam_labels()
    paths = []
    for metric, tensor in analysis.tensors.items():
        for k, classifier in enumerate(tensor.classifier_ids):
            path = out_dir / SERIES_FILENAME.format(metric=metric, classifier=classifier)
            with open(path, "w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(
                    ["aug_id", "aug_name"]
                    + [labels.get(d, d) for d in tensor.hyperparam_labels]
                )
                for i in range(N_AUGMENTATIONS):
                    writer.writerow(
                        [i, AUGMENTATION_NAMES[i]]
                        + [format_float(v) for v in tensor.values[k, :, i]]
                    )
            paths.append(path)
    return paths


def write_intercepts(analysis: Analysis, out_dir) -> Path:
    """Свободные члены регрессий: строка на гиперпараметры, столбец на модель и метрику"""
    path = Path(out_dir) / INTERCEPTS_FILENAME
    labels = analysis.hyperparam_labels()
    classifier_ids = analysis.manifest["classifier_ids"]
    intercepts = {
        (fit.classifier, fit.hyperparams, fit.metric): fit.intercept
        for fit in analysis.fits
    }
    columns = [(c, m) for c in classifier_ids for m in METRICS]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["hyperparams"] + [f"{c}/{m}" for c, m in columns])
        for descriptor, label in labels.items():
            writer.writerow(
                [label]
                + [
                    format_float(intercepts[(c, descriptor, m)])
                    if (c, descriptor, m) in intercepts
                    else ""
                    for c, m in columns
                ]
            )
    return path


def _names(rows: Sequence[MetricsRow]) -> str:
    if not rows:
        return "none"
    return ", ".join(f"{row.name} ({row.augmentation})" for row in rows)


def render_report(
    rows: Sequence[MetricsRow],
    metric: str,
    reliability_mode: str,
    sensitivity_threshold: float,
    top_n: int,
) -> str:
    """Markdown-сводка; списки зависят только от таблицы метрик и порогов"""
    rows = classify(rows, sensitivity_threshold, top_n, reliability_mode)
    sensitive = [r for r in rows if r.sensitive]
    insensitive = [r for r in rows if not r.sensitive]
    reliable = sorted(
        (r for r in rows if r.reliable),
        key=lambda r: (-r.reliability(reliability_mode), r.augmentation),
    )
    variance_headers = [f"Var M{k + 1}" for k in range(len(rows[0].per_model_variance))]

    lines = [
        "# Augmentation sensitivity report",
        "",
        f"- Metric: `{metric}`",
        f"- Sensitivity threshold: {sensitivity_threshold:g}",
        f"- Reliable: top {top_n} positive reliability values ({reliability_mode} mode)",
        "",
        "| Id | Augmentation | "
        + " | ".join(variance_headers)
        + " | Sensitivity | Consistency | Influence | Reliability (table) "
        "| Reliability (equation) | Sensitive | Reliable |",
        "|" + "---|" * (len(variance_headers) + 9),
    ]
    for row in rows:
        lines.append(
            f"| {row.augmentation} | {row.name} | "
            + " | ".join(format_float(v) for v in row.per_model_variance)
            + f" | {format_float(row.sensitivity)} | {format_float(row.consistency)}"
            f" | {format_float(row.influence)} | {format_float(row.reliability_table)}"
            f" | {format_float(row.reliability_equation)}"
            f" | {'yes' if row.sensitive else 'no'} | {'yes' if row.reliable else 'no'} |"
        )

    lines += [
        "",
        "## Classification",
        "",
        f"- Sensitive (sensitivity ≥ {sensitivity_threshold:g}): {_names(sensitive)}",
        f"- Insensitive: {_names(insensitive)}",
        f"- Reliable: {_names(reliable)}",
        f"- Least sensitive: {_names(least_sensitive(rows, RANKING_SIZE))}",
        f"- Most sensitive: {_names(most_sensitive(rows, RANKING_SIZE))}",
        "",
        "## Reliability modes",
        "",
        "Table mode multiplies sensitivity by influence; equation mode multiplies "
        "consistency (1 / sensitivity) by influence. Both values are listed above.",
        "",
    ]
    degenerate = [r for r in rows if r.degenerate]
    if degenerate:
        lines += [
            f"Zero sensitivity (infinite consistency): {_names(degenerate)}",
            "",
        ]
    return "\n".join(lines)


def write_report(
    analysis: Analysis,
    out_dir,
    reliability_mode: str,
    sensitivity_threshold: float,
    top_n: int,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_series_files(analysis, out_dir)
    write_intercepts(analysis, out_dir)
    path = out_dir / REPORT_FILENAME
    path.write_text(
        render_report(
            analysis.rows,
            analysis.metric,
            reliability_mode,
            sensitivity_threshold,
            top_n,
        ),
        encoding="utf-8",
    )
    logger.info(f"Report written to {path}")
    return path
