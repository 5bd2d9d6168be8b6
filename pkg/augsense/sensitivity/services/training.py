import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..exceptions import TrainingDivergedException, ValidationException
from ..models import (
    AugmentationParams,
    AugVector,
    ClassifierSpec,
    DataSplit,
    EvalResult,
    HyperParams,
    ImageSet,
)
from .augment import augment_batch
from .classifiers import Classifier, build_classifier, log_softmax, to_features
from .optimizers import build_optimizer

logger = logging.getLogger(__name__)

# отдельные потоки случайности: инициализация, перемешивание, аугментации
_STREAMS = 3


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    valid_loss: float


@dataclass
class TrainingResult:
    classifier: Classifier
    history: List[EpochStats] = field(default_factory=list)

    @property
    def train_losses(self) -> List[float]:
        return [stats.train_loss for stats in self.history]


def evaluate_probabilities(probabilities: np.ndarray, labels: np.ndarray) -> EvalResult:
    """Точность в процентах и средняя кросс-энтропия по матрице вероятностей (N, 10)"""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if n == 0:
        raise ValidationException("Нельзя оценить модель на пустой выборке")

    picked = probabilities[np.arange(n), labels]
    correct = int(np.sum(probabilities.argmax(axis=1) == labels))
    loss = float(-np.log(np.clip(picked, np.finfo(np.float64).tiny, None)).mean())
    return EvalResult(accuracy=100.0 * correct / n, loss=max(loss, 0.0))


def evaluate(classifier: Classifier, image_set: ImageSet) -> EvalResult:
    """
    Оценка без аугментаций: чистая функция параметров и изображений
    """
    n = len(image_set)
    if n == 0:
        raise ValidationException("Нельзя оценить модель на пустой выборке")

    labels = image_set.labels.astype(np.int64)
    log_probs = log_softmax(classifier.forward(to_features(image_set.images)))
    correct = int(np.sum(log_probs.argmax(axis=1) == labels))
    loss = float(-log_probs[np.arange(n), labels].mean())
    return EvalResult(accuracy=100.0 * correct / n, loss=max(loss, 0.0))


def train(
    spec: ClassifierSpec,
    split: DataSplit,
    vector: AugVector,
    params: AugmentationParams,
    hp: HyperParams,
    seed: int,
) -> TrainingResult:
    """
    Обучает классификатор hp.epochs эпох перемешанными мини-батчами.
    Каждый батч аугментируется вектором `vector` перед прямым проходом.
    """
    hp.validate()
    train_set = split.train
    n = len(train_set)
    if n == 0:
        raise ValidationException("Обучающая выборка пуста")

    init_seq, shuffle_seq, augment_seq = np.random.SeedSequence(seed).spawn(_STREAMS)
    classifier = build_classifier(spec, np.random.default_rng(init_seq))
    optimizer = build_optimizer(hp, classifier.parameters)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    augment_rng = np.random.default_rng(augment_seq)
    labels = train_set.labels.astype(np.int64)

    result = TrainingResult(classifier)
    for epoch in range(1, hp.epochs + 1):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, hp.batch_size):
            batch = order[start : start + hp.batch_size]
            images = augment_batch(train_set.images[batch], vector, params, augment_rng)
            loss, gradients = classifier.loss_and_gradients(
                to_features(images), labels[batch]
            )
            if not np.isfinite(loss):
                raise TrainingDivergedException(epoch)
            optimizer.step(gradients)

        train_loss = evaluate(classifier, train_set).loss
        if not np.isfinite(train_loss):
            raise TrainingDivergedException(epoch)
        valid_loss = evaluate(classifier, split.valid).loss if len(split.valid) else float("nan")
        result.history.append(EpochStats(epoch, train_loss, valid_loss))
        logger.debug(
            f"{spec.id} {hp.label} {vector} epoch {epoch}: train_loss={train_loss:.4f}"
        )
    return result
