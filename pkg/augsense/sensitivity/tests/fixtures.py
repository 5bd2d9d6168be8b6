"""
Опорные данные для тестов: нормализованные ряды коэффициентов двух моделей
(ResNet50, ResNet101) для четырех настроек гиперпараметров, свободные члены
регрессий и значения таблиц чувствительности и надежности.
"""

import json
from pathlib import Path

import numpy as np

from ..models import (
    AugmentationParams,
    AugVector,
    ClassifierSpec,
    CoefficientTensor,
    DataSplit,
    ImageSet,
    RunRecord,
)
from ..services.dataset import write_idx
from ..services.design import ExperimentGrid, build_plan, default_hyperparams

REFERENCE_CLASSIFIERS = ("resnet50", "resnet101")
REFERENCE_HYPERPARAM_LABELS = ("SGD/20", "SGD/15", "Adam/20", "Adam/15")

REFERENCE_ACCURACY = {
    "resnet50": (
        (-1.37753, -0.38749, -1.09627, 0.82165, 1.00407, 1.6181, -0.90568, 0.69845, -0.3753),
        (-1.05912, -0.70609, 0.24839, 0.06388, 0.37245, 0.85112, -1.98115, 0.90196, 1.30855),
        (-1.57819, -0.98549, -0.6173, 0.83706, 1.54998, 1.21236, -0.64639, 0.37885, -0.15087),
        (-1.09506, -1.8638, 0.85154, 1.03695, 0.59073, 0.12869, -0.78837, -0.09767, 1.23698),
    ),
    "resnet101": (
        (-0.66805, -1.30232, 0.21443, 1.30395, 1.64193, 0.89983, -0.38051, -0.86491, -0.84435),
        (-0.09396, -2.21461, 0.74823, 0.64976, -0.62531, -0.16057, 0.92741, -0.49069, 1.25975),
        (-1.00143, -1.28967, 1.46033, 0.42909, 0.97253, 0.83223, -1.49945, 0.29897, -0.20261),
        (-0.11416, -0.83631, 0.41451, 1.22928, -0.96455, 2.08849, -0.63685, -0.9144, -0.266),
    ),
}

REFERENCE_LOSS = {
    "resnet50": (
        (1.86404, 0.67803, 0.58226, -0.60635, -0.99853, -1.567, 0.77833, -0.49495, -0.23582),
        (1.46457, 0.09303, -0.96806, 0.6726, -0.55259, -0.52453, 1.6835, -1.31929, -0.54922),
        (1.85244, 1.27735, 0.00981, -0.62812, -1.5652, -1.00633, 0.24856, -0.10154, -0.08696),
        (0.41434, 1.7776, -1.30983, -0.41325, -0.10486, -0.19157, 0.95644, 0.48017, -1.60903),
    ),
    "resnet101": (
        (-0.91805, 0.4217, 0.33034, -2.01824, -0.58406, -0.35578, 0.94881, 1.26523, 0.91005),
        (0.63276, 0.98258, -1.247, -0.58474, -0.23721, 1.98876, -0.99077, 0.2737, -0.81808),
        (-0.5953, 0.83343, -1.7796, 1.25519, 0.04326, 0.66887, 0.90186, -1.39342, 0.06571),
        (-1.27931, -0.76738, 0.88565, 0.21956, -0.4324, 1.62897, -0.5824, 1.32741, -1.0001),
    ),
}

REFERENCE_INTERCEPTS = {
    ("resnet50", "accuracy"): (90.512, 89.323, 89.3675, 89.3883),
    ("resnet50", "loss"): (33.3264, 34.0535, 29.5997, 33.64966),
    ("resnet101", "accuracy"): (90.3598, 91.2862, 91.54377, 71.6030),
    ("resnet101", "loss"): (42.5369, -163.4952, 116.7092, 1255.60897),
}

# aug id -> (дисперсия ResNet50, дисперсия ResNet101, чувствительность)
REFERENCE_SENSITIVITY = {
    0: (0.060465, 0.196556, 0.128511),
    1: (0.402366, 0.334197, 0.368281),
    2: (0.758516, 0.299119, 0.528818),
    3: (0.183786, 0.185314, 0.184549),
    4: (0.268516, 1.566889, 0.917703),
}

# aug id -> (влияние, надежность в табличном режиме)
REFERENCE_RELIABILITY = {
    0: (-0.873437, -0.112246),
    1: (-1.198223, -0.441283),
    2: (0.277983, 0.147002),
    3: (0.796453, 0.146985),
    4: (0.567729, 0.521006),
}

REFERENCE_EQUATION_RELIABILITY_AUG4 = 0.618642

# свободный член для синтетического лосса: держит значения неотрицательными
FIXTURE_LOSS_INTERCEPT = 50.0


def reference_series(metric: str):
    return REFERENCE_ACCURACY if metric == "accuracy" else REFERENCE_LOSS


def reference_tensor(metric: str = "accuracy") -> CoefficientTensor:
    series = reference_series(metric)
    return CoefficientTensor(
        np.array([series[c] for c in REFERENCE_CLASSIFIERS]),
        REFERENCE_CLASSIFIERS,
        REFERENCE_HYPERPARAM_LABELS,
        metric,
        # ряды округлены, нормализация выполняется только до 1e-3
        False,
    )


def all_vectors():
    return [
        AugVector(tuple(bool((code >> (8 - i)) & 1) for i in range(9)))
        for code in range(1, 512)
    ]


def reference_plan(classifiers=REFERENCE_CLASSIFIERS, n_hyperparams=4):
    grid = ExperimentGrid(
        classifiers=[ClassifierSpec(c, "linear-softmax") for c in classifiers],
        hyperparams=default_hyperparams()[:n_hyperparams],
        vectors=all_vectors(),
        seed_base=7,
    )
    return build_plan(grid, AugmentationParams())


def reference_records(plan):
    """
    Записи, для которых регрессия по всем 511 векторам дает ровно опорные
    коэффициенты и свободные члены
    """
    records = []
    for run in plan.runs:
        x = run.vector.as_array()
        accuracy = REFERENCE_INTERCEPTS[(run.classifier.id, "accuracy")][run.hp_index]
        accuracy += float(np.dot(REFERENCE_ACCURACY[run.classifier.id][run.hp_index], x))
        loss = FIXTURE_LOSS_INTERCEPT + float(
            np.dot(REFERENCE_LOSS[run.classifier.id][run.hp_index], x)
        )
        hp = run.hyperparams
        records.append(
            RunRecord(
                classifier=run.classifier.id,
                hyperparams=hp.descriptor,
                optimizer=hp.optimizer,
                epochs=hp.epochs,
                learning_rate=hp.learning_rate,
                batch_size=hp.batch_size,
                vector=run.vector.to_string(),
                seed=run.seed,
                status="done",
                test_accuracy=accuracy,
                test_loss=loss,
                test_loss_scaled=loss * 100,
            )
        )
    return records


def write_store(records, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.as_dict()) + "\n")
    return path


def make_image_set(n_per_class: int, classes=range(10), seed: int = 0, peak: int = 200):
    """
    Синтетические изображения: у класса c яркая горизонтальная полоса в строках
    2c+4..2c+5 на слабом шуме, классы линейно разделимы
    """
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for cls in classes:
        for _ in range(n_per_class):
            image = rng.integers(0, max(1, peak // 8), size=(28, 28))
            image[2 * cls + 4 : 2 * cls + 6, 4:24] = peak
            images.append(image)
            labels.append(cls)
    return ImageSet(np.array(images, dtype=np.uint8), np.array(labels, dtype=np.uint8))


def make_split(n_per_class: int = 4, classes=range(10), seed: int = 0, peak: int = 200):
    return DataSplit(
        train=make_image_set(n_per_class, classes, seed, peak),
        valid=make_image_set(1, classes, seed + 1, peak),
        test=make_image_set(2, classes, seed + 2, peak),
    )


def write_dataset(directory, n_per_class: int = 6, seed: int = 0):
    """Пишет пару обучающих и тестовых IDX файлов с именами Fashion-MNIST"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_idx(
        make_image_set(n_per_class, seed=seed),
        directory / "train-images-idx3-ubyte.gz",
        directory / "train-labels-idx1-ubyte.gz",
        compress=True,
    )
    write_idx(
        make_image_set(2, seed=seed + 1),
        directory / "t10k-images-idx3-ubyte.gz",
        directory / "t10k-labels-idx1-ubyte.gz",
        compress=True,
    )
    return directory
