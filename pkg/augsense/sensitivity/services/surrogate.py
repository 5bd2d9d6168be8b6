import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..constants import (
    AUGMENTATION_NAMES,
    MIN_RECOMMENDED_SAMPLES,
    N_AUGMENTATIONS,
    RANK_TOLERANCE,
    SERIES_SEPARATOR,
)
from ..exceptions import (
    IncompleteGridException,
    NormalizationException,
    ValidationException,
)
from ..models import AugVector, CoefficientTensor, ResultTable, SurrogateFit
from ..utils import format_float

logger = logging.getLogger(__name__)

CSV_PRECISION = 10
FIT_COLUMNS = (
    ("classifier", "hyperparams", "metric", "intercept")
    + tuple(f"coef_{i}" for i in range(N_AUGMENTATIONS))
    + ("rss", "n_samples", "warnings")
)


def fit_ols(
    X,
    y,
    classifier: str = "",
    hyperparams: str = "",
    metric: str = "accuracy",
) -> SurrogateFit:
    """
    Линейная регрессия метрики по битам аугментаций со свободным членом.

    Система центрируется и решается через SVD (lstsq) с отсечением сингулярных
    чисел ниже 1e-10 от наибольшего; свободный член восстанавливается как
    mean(y) - mean(X) @ beta. Постоянные столбцы получают коэффициент 0.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != N_AUGMENTATIONS:
        raise ValidationException(
            f"Матрица плана должна иметь {N_AUGMENTATIONS} столбцов, получено {X.shape}"
        )
    if y.shape != (X.shape[0],):
        raise ValidationException("Длина y не совпадает с числом строк X")
    n = X.shape[0]
    if n == 0:
        raise ValidationException("Нет данных для регрессии")
    if not np.all(np.isfinite(y)):
        raise ValidationException("Значения метрики содержат нечисловые значения")

    warnings = []
    if n < MIN_RECOMMENDED_SAMPLES:
        warnings.append(f"only {n} samples, {MIN_RECOMMENDED_SAMPLES} recommended")

    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean

    constant = np.flatnonzero(np.all(Xc == 0.0, axis=0))
    if constant.size:
        names = ", ".join(AUGMENTATION_NAMES[i] for i in constant)
        warnings.append(f"constant columns: {names}")

    beta, _, rank, _ = np.linalg.lstsq(Xc, yc, rcond=RANK_TOLERANCE)
    if rank < N_AUGMENTATIONS - constant.size:
        warnings.append(f"rank deficient design (rank {rank})")

    intercept = float(y_mean - x_mean @ beta)
    residuals = y - (intercept + X @ beta)
    fit = SurrogateFit(
        classifier=classifier,
        hyperparams=hyperparams,
        metric=metric,
        intercept=intercept,
        coefficients=tuple(float(b) for b in beta),
        rss=float(residuals @ residuals),
        n_samples=n,
        warnings=tuple(warnings),
    )
    for message in warnings:
        logger.warning(f"Fit {fit.series_name} [{metric}]: {message}")
    return fit


def predict(fit: SurrogateFit, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return fit.intercept + X @ np.asarray(fit.coefficients)


def normalize_series(coefficients) -> np.ndarray:
    """z-оценка по среднему и популяционному стандартному отклонению (ddof=0)"""
    values = np.asarray(coefficients, dtype=np.float64)
    mean = values.mean()
    std = values.std()
    if std <= 1e-12 * max(1.0, abs(mean)):
        raise NormalizationException()
    return (values - mean) / std


def fit_cells(
    table: ResultTable,
    classifier_ids: Sequence[str],
    hyperparams: Sequence[str],
    vectors: Sequence[AugVector],
    metric: str,
) -> List[SurrogateFit]:
    """
    Строит регрессию для каждой ячейки (классификатор, гиперпараметры).
    Используются только завершенные запуски из плана; тройка без записи
    считается пропуском.
    """
    by_key = table.by_key()
    missing = []
    cells: Dict[Tuple[str, str], List] = {}
    for classifier in classifier_ids:
        for descriptor in hyperparams:
            rows = []
            for vector in vectors:
                record = by_key.get((classifier, descriptor, vector.to_string()))
                if record is None:
                    missing.append((classifier, descriptor, vector.to_string()))
                elif record.is_done:
                    rows.append((vector.as_array(), record.metric(metric)))
                else:
                    logger.warning(
                        f"Skipping failed run {classifier} {descriptor} {vector}"
                    )
            if not rows:
                missing.append((classifier, descriptor))
            cells[(classifier, descriptor)] = rows
    if missing:
        raise IncompleteGridException(missing)

    fits = []
    for (classifier, descriptor), rows in cells.items():
        X = np.stack([row[0] for row in rows])
        y = np.array([row[1] for row in rows])
        fits.append(fit_ols(X, y, classifier, descriptor, metric))
    return fits


def build_tensor(
    fits: Sequence[SurrogateFit],
    metric: str,
    classifier_ids: Optional[Sequence[str]] = None,
    hyperparams: Optional[Sequence[str]] = None,
    normalize: bool = True,
) -> CoefficientTensor:
    """
    Собирает нормализованные ряды коэффициентов в тензор (K, L, 9).
    Без явного порядка классификаторы и гиперпараметры берутся в порядке появления.
    """
    selected = [fit for fit in fits if fit.metric == metric]
    if classifier_ids is None:
        classifier_ids = list(dict.fromkeys(fit.classifier for fit in selected))
    if hyperparams is None:
        hyperparams = list(dict.fromkeys(fit.hyperparams for fit in selected))
    if not classifier_ids or not hyperparams:
        raise IncompleteGridException([], f"Нет регрессий для метрики {metric}")

    cells: Dict[Tuple[str, str], SurrogateFit] = {}
    for fit in selected:
        cell = (fit.classifier, fit.hyperparams)
        if cell in cells:
            raise ValidationException(f"Повторная регрессия для ячейки {cell}")
        cells[cell] = fit

    missing = [
        (classifier, descriptor)
        for classifier in classifier_ids
        for descriptor in hyperparams
        if (classifier, descriptor) not in cells
    ]
    if missing:
        raise IncompleteGridException(missing)

    values = np.empty((len(classifier_ids), len(hyperparams), N_AUGMENTATIONS))
    for k, classifier in enumerate(classifier_ids):
        for l, descriptor in enumerate(hyperparams):
            coefficients = np.asarray(cells[(classifier, descriptor)].coefficients)
            values[k, l] = normalize_series(coefficients) if normalize else coefficients
    return CoefficientTensor(values, classifier_ids, hyperparams, metric, normalize)


def write_fits_csv(fits: Sequence[SurrogateFit], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(FIT_COLUMNS)
        for fit in fits:
            writer.writerow(
                [fit.classifier, fit.hyperparams, fit.metric]
                + [format_float(fit.intercept, CSV_PRECISION)]
                + [format_float(c, CSV_PRECISION) for c in fit.coefficients]
                + [format_float(fit.rss, CSV_PRECISION), fit.n_samples]
                + ["; ".join(fit.warnings)]
            )
    return path


def read_fits_csv(path) -> List[SurrogateFit]:
    fits = []
    with open(path, encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            fits.append(
                SurrogateFit(
                    classifier=row["classifier"],
                    hyperparams=row["hyperparams"],
                    metric=row["metric"],
                    intercept=float(row["intercept"]),
                    coefficients=tuple(
                        float(row[f"coef_{i}"]) for i in range(N_AUGMENTATIONS)
                    ),
                    rss=float(row["rss"]),
                    n_samples=int(row["n_samples"]),
                    warnings=tuple(w for w in row["warnings"].split("; ") if w),
                )
            )
    return fits


def series_header(classifier: str, descriptor: str) -> str:
    for part in (classifier, descriptor):
        if SERIES_SEPARATOR in part:
            raise ValidationException(
                f"Идентификатор {part!r} содержит разделитель {SERIES_SEPARATOR!r}"
            )
    return f"{classifier}{SERIES_SEPARATOR}{descriptor}"


def parse_series_header(name: str) -> Tuple[str, str]:
    parts = name.split(SERIES_SEPARATOR)
    if len(parts) != 2 or not all(parts):
        raise ValidationException(f"Неверный заголовок ряда тензора: {name!r}")
    return parts[0], parts[1]


def write_tensor_csv(tensor: CoefficientTensor, path) -> Path:
    """Строки: аугментации; столбцы: ряды классификатор__гиперпараметры"""
    path = Path(path)
    K, L, _ = tensor.shape
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["aug_id", "aug_name"]
            + [
                series_header(tensor.classifier_ids[k], tensor.hyperparam_labels[l])
                for k in range(K)
                for l in range(L)
            ]
        )
        for i in range(N_AUGMENTATIONS):
            writer.writerow(
                [i, AUGMENTATION_NAMES[i]]
                + [
                    format_float(tensor.values[k, l, i], CSV_PRECISION)
                    for k in range(K)
                    for l in range(L)
                ]
            )
    return path


def read_tensor_csv(path, metric: str, normalized: bool = True) -> CoefficientTensor:
    with open(path, encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if len(rows) != N_AUGMENTATIONS + 1:
        raise ValidationException(f"Файл тензора {path} должен содержать 9 строк данных")

    series = [parse_series_header(name) for name in rows[0][2:]]
    classifier_ids = list(dict.fromkeys(s[0] for s in series))
    hyperparams = list(dict.fromkeys(s[1] for s in series))
    columns = {tuple(s): j for j, s in enumerate(series)}
    data = np.array([[float(v) for v in row[2:]] for row in rows[1:]])

    values = np.empty((len(classifier_ids), len(hyperparams), N_AUGMENTATIONS))
    for k, classifier in enumerate(classifier_ids):
        for l, descriptor in enumerate(hyperparams):
            j = columns.get((classifier, descriptor))
            if j is None:
                raise IncompleteGridException([(classifier, descriptor)])
            values[k, l] = data[:, j]
    return CoefficientTensor(values, classifier_ids, hyperparams, metric, normalized)
