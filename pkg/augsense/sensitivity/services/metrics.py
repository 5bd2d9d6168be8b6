"""
Метрики аугментаций по тензору нормализованных коэффициентов (K, L, 9):
чувствительность, согласованность, влияние и надежность.
"""

import csv
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import List, Sequence

import numpy as np

from ..constants import (
    AUGMENTATION_NAMES,
    DEFAULT_RELIABILITY_MODE,
    N_AUGMENTATIONS,
    RELIABILITY_MODES,
    SENSITIVITY_THRESHOLD,
    TOP_N_RELIABLE,
)
from ..exceptions import MetricsException, ValidationException
from ..models import CoefficientTensor, MetricsRow
from ..utils import format_float

logger = logging.getLogger(__name__)

CSV_PRECISION = 6


def per_model_variance(tensor: CoefficientTensor, i: int, k: int) -> float:
    """Выборочная дисперсия (ddof=1) коэффициентов аугментации i по гиперпараметрам"""
    _, L, _ = tensor.shape
    if L < 2:
        raise MetricsException(
            f"Для дисперсии нужно не меньше 2 настроек гиперпараметров, получено {L}"
        )
    return float(np.var(tensor.values[k, :, i], ddof=1))


def sensitivity(tensor: CoefficientTensor, i: int) -> float:
    K = tensor.shape[0]
    return float(np.mean([per_model_variance(tensor, i, k) for k in range(K)]))


def consistency(sensitivity_value: float) -> float:
    if sensitivity_value < 0:
        raise ValidationException("Чувствительность не может быть отрицательной")
    if sensitivity_value == 0:
        return math.inf
    return 1.0 / sensitivity_value


def influence(tensor: CoefficientTensor, i: int) -> float:
    """Среднее по классификаторам от среднего по гиперпараметрам"""
    return float(tensor.values[:, :, i].mean(axis=1).mean())


def reliability(
    sensitivity_value: float,
    consistency_value: float,
    influence_value: float,
    mode: str = DEFAULT_RELIABILITY_MODE,
) -> float:
    """
    table: чувствительность * влияние;
    equation: согласованность * влияние
    """
    if mode not in RELIABILITY_MODES:
        raise ValidationException(f"Неизвестный режим надежности: {mode}")
    if mode == "table":
        return sensitivity_value * influence_value
    if math.isinf(consistency_value):
        return 0.0 if influence_value == 0 else math.copysign(math.inf, influence_value)
    return consistency_value * influence_value


def classify(
    rows: Sequence[MetricsRow],
    sensitivity_threshold: float = SENSITIVITY_THRESHOLD,
    top_n: int = TOP_N_RELIABLE,
    mode: str = DEFAULT_RELIABILITY_MODE,
) -> List[MetricsRow]:
    """
    sensitive: чувствительность >= порога.
    reliable: положительная надежность среди top_n наибольших; при равенстве
    выигрывает меньший индекс аугментации.
    """
    positive = [row for row in rows if row.reliability(mode) > 0]
    ranked = sorted(positive, key=lambda row: (-row.reliability(mode), row.augmentation))
    reliable_ids = {row.augmentation for row in ranked[:top_n]}
    return [
        replace(
            row,
            sensitive=row.sensitivity >= sensitivity_threshold,
            reliable=row.augmentation in reliable_ids,
        )
        for row in rows
    ]


def compute_metrics(
    tensor: CoefficientTensor,
    sensitivity_threshold: float = SENSITIVITY_THRESHOLD,
    top_n: int = TOP_N_RELIABLE,
    mode: str = DEFAULT_RELIABILITY_MODE,
) -> List[MetricsRow]:
    K = tensor.shape[0]
    rows = []
    for i in range(N_AUGMENTATIONS):
        variances = tuple(per_model_variance(tensor, i, k) for k in range(K))
        sens = float(np.mean(variances))
        cons = consistency(sens)
        infl = influence(tensor, i)
        if sens == 0:
            logger.warning(f"{AUGMENTATION_NAMES[i]} has zero sensitivity")
        rows.append(
            MetricsRow(
                augmentation=i,
                per_model_variance=variances,
                sensitivity=sens,
                consistency=cons,
                influence=infl,
                reliability_table=reliability(sens, cons, infl, "table"),
                reliability_equation=reliability(sens, cons, infl, "equation"),
                degenerate=sens == 0,
            )
        )
    return classify(rows, sensitivity_threshold, top_n, mode)


def least_sensitive(rows: Sequence[MetricsRow], n: int = 3) -> List[MetricsRow]:
    return sorted(rows, key=lambda row: (row.sensitivity, row.augmentation))[:n]


def most_sensitive(rows: Sequence[MetricsRow], n: int = 3) -> List[MetricsRow]:
    return sorted(rows, key=lambda row: (-row.sensitivity, row.augmentation))[:n]


def metrics_columns(n_models: int) -> List[str]:
    return (
        ["aug_id", "aug_name"]
        + [f"var_m{k + 1}" for k in range(n_models)]
        + [
            "sensitivity",
            "consistency",
            "influence",
            "reliability_table",
            "reliability_equation",
            "sensitive",
            "reliable",
        ]
    )


def write_metrics_csv(rows: Sequence[MetricsRow], path) -> Path:
    path = Path(path)
    n_models = len(rows[0].per_model_variance) if rows else 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(metrics_columns(n_models))
        for row in rows:
            writer.writerow(
                [row.augmentation, row.name]
                + [format_float(v, CSV_PRECISION) for v in row.per_model_variance]
                + [
                    format_float(row.sensitivity, CSV_PRECISION),
                    format_float(row.consistency, CSV_PRECISION),
                    format_float(row.influence, CSV_PRECISION),
                    format_float(row.reliability_table, CSV_PRECISION),
                    format_float(row.reliability_equation, CSV_PRECISION),
                    "true" if row.sensitive else "false",
                    "true" if row.reliable else "false",
                ]
            )
    return path


def read_metrics_csv(path) -> List[MetricsRow]:
    rows = []
    with open(path, encoding="utf-8", newline="") as handle:
        for record in csv.DictReader(handle):
            variances = tuple(
                float(record[name])
                for name in record
                if name.startswith("var_m")
            )
            sens = float(record["sensitivity"])
            rows.append(
                MetricsRow(
                    augmentation=int(record["aug_id"]),
                    per_model_variance=variances,
                    sensitivity=sens,
                    consistency=float(record["consistency"]),
                    influence=float(record["influence"]),
                    reliability_table=float(record["reliability_table"]),
                    reliability_equation=float(record["reliability_equation"]),
                    sensitive=record["sensitive"] == "true",
                    reliable=record["reliable"] == "true",
                    degenerate=sens == 0,
                )
            )
    if len(rows) != N_AUGMENTATIONS:
        raise MetricsException(
            f"Таблица метрик {path} должна содержать {N_AUGMENTATIONS} строк"
        )
    return rows
