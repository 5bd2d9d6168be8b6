"""
Доменные типы пайплайна.

Все типы неизменяемые: датасеты и параметры передаются между процессами раннера
и читаются конкурентно.
"""

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .constants import (
    AUGMENTATION_NAMES,
    DEFAULT_BATCH_SIZE,
    DEFAULT_BLUR_KERNEL_SIZES,
    DEFAULT_DOWNSCALE_FACTOR,
    DEFAULT_GAUSS_NOISE_VAR_LIMIT,
    DEFAULT_GAUSSIAN_BLUR_KERNEL_SIZES,
    DEFAULT_LEARNING_RATES,
    DEFAULT_PROBABILITIES,
    DEFAULT_ROTATE_LIMIT,
    DEFAULT_SCALE_LIMIT,
    DEFAULT_SHIFT_LIMIT,
    IMAGE_SIZE,
    LOSS_SCALE,
    METRICS,
    MLP_HIDDEN_UNITS,
    N_AUGMENTATIONS,
    N_CLASSES,
    NORMALIZATION_TOLERANCE,
    OPTIMIZERS,
    OPTIMIZER_LABELS,
    RUN_STATUS_DONE,
    RUN_STATUS_FAILED,
    RUN_STATUSES,
)
from .exceptions import NormalizationException, ValidationException


@dataclass(frozen=True)
class AugVector:
    """
    Бинарная маска из 9 элементов: какие аугментации применяются в запуске.
    Текстовая форма: строка из '0'/'1', индекс 0 слева.
    """

    bits: Tuple[bool, ...]

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        if len(bits) != N_AUGMENTATIONS:
            raise ValidationException(
                f"Вектор аугментаций должен иметь длину {N_AUGMENTATIONS}, получено {len(bits)}"
            )
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "AugVector":
        text = text.strip()
        if len(text) != N_AUGMENTATIONS or set(text) - {"0", "1"}:
            raise ValidationException(f"Неверная запись вектора аугментаций: {text!r}")
        return cls(tuple(ch == "1" for ch in text))

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "AugVector":
        bits = [False] * N_AUGMENTATIONS
        for index in indices:
            if not 0 <= index < N_AUGMENTATIONS:
                raise ValidationException(f"Неверный индекс аугментации: {index}")
            bits[index] = True
        return cls(tuple(bits))

    @classmethod
    def from_labels(cls, text: str) -> "AugVector":
        """Читает запись вида `a1,a5,a6` (нумерация аугментаций с единицы)"""
        indices = []
        for token in text.replace(" ", "").split(","):
            if not token:
                continue
            if not token.startswith("a") or not token[1:].isdigit():
                raise ValidationException(f"Неверная метка аугментации: {token!r}")
            indices.append(int(token[1:]) - 1)
        return cls.from_indices(indices)

    @classmethod
    def zero(cls) -> "AugVector":
        return cls((False,) * N_AUGMENTATIONS)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def to_labels(self) -> str:
        return ",".join(f"a{i + 1}" for i in self.active_ids)

    @property
    def active_ids(self) -> Tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    @property
    def is_zero(self) -> bool:
        return not any(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.float64)

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True)
class AugmentationParams:
    """Параметры ядер аугментаций; значения по умолчанию зафиксированы в constants"""

    probabilities: Tuple[float, ...] = DEFAULT_PROBABILITIES
    blur_kernel_sizes: Tuple[int, ...] = DEFAULT_BLUR_KERNEL_SIZES
    gaussian_blur_kernel_sizes: Tuple[int, ...] = DEFAULT_GAUSSIAN_BLUR_KERNEL_SIZES
    downscale_factor: float = DEFAULT_DOWNSCALE_FACTOR
    gauss_noise_var_limit: Tuple[float, float] = DEFAULT_GAUSS_NOISE_VAR_LIMIT
    shift_limit: float = DEFAULT_SHIFT_LIMIT
    scale_limit: float = DEFAULT_SCALE_LIMIT
    rotate_limit: float = DEFAULT_ROTATE_LIMIT

    def __post_init__(self):
        object.__setattr__(
            self, "probabilities", tuple(float(p) for p in self.probabilities)
        )
        object.__setattr__(
            self, "blur_kernel_sizes", tuple(int(k) for k in self.blur_kernel_sizes)
        )
        object.__setattr__(
            self,
            "gaussian_blur_kernel_sizes",
            tuple(int(k) for k in self.gaussian_blur_kernel_sizes),
        )
        object.__setattr__(
            self,
            "gauss_noise_var_limit",
            tuple(float(v) for v in self.gauss_noise_var_limit),
        )
        self.validate()

    def validate(self):
        if len(self.probabilities) != N_AUGMENTATIONS:
            raise ValidationException(
                f"Нужно {N_AUGMENTATIONS} вероятностей, получено {len(self.probabilities)}"
            )
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise ValidationException("Вероятности аугментаций должны лежать в [0, 1]")
        for sizes in (self.blur_kernel_sizes, self.gaussian_blur_kernel_sizes):
            if not sizes or any(k < 3 or k % 2 == 0 for k in sizes):
                raise ValidationException(
                    "Размеры ядер размытия должны быть нечетными и не меньше 3"
                )
        if not 0.0 < self.downscale_factor <= 1.0:
            raise ValidationException("Коэффициент Downscale должен лежать в (0, 1]")
        low, high = self.gauss_noise_var_limit
        if low < 0 or high < low:
            raise ValidationException("Неверный диапазон дисперсии GaussNoise")
        if min(self.shift_limit, self.scale_limit, self.rotate_limit) < 0:
            raise ValidationException("Пределы ShiftScaleRotate должны быть неотрицательны")

    def probability(self, aug_id: int) -> float:
        return self.probabilities[aug_id]

    def with_probability(self, p: float) -> "AugmentationParams":
        """Копия с одинаковой вероятностью для всех аугментаций"""
        return replace(self, probabilities=(p,) * N_AUGMENTATIONS)

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["probabilities"] = dict(zip(AUGMENTATION_NAMES, self.probabilities))
        for key in (
            "blur_kernel_sizes",
            "gaussian_blur_kernel_sizes",
            "gauss_noise_var_limit",
        ):
            data[key] = list(data[key])
        return data

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "AugmentationParams":
        """Строит параметры из частичного словаря переопределений"""
        data = dict(data or {})
        probabilities = data.pop("probabilities", None)
        if isinstance(probabilities, dict):
            unknown = set(probabilities) - set(AUGMENTATION_NAMES)
            if unknown:
                raise ValidationException(
                    f"Неизвестные аугментации: {', '.join(sorted(unknown))}"
                )
            merged = list(DEFAULT_PROBABILITIES)
            for name, p in probabilities.items():
                merged[AUGMENTATION_NAMES.index(name)] = p
            data["probabilities"] = tuple(merged)
        elif probabilities is not None:
            data["probabilities"] = tuple(probabilities)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationException(
                f"Неизвестные параметры аугментаций: {', '.join(sorted(unknown))}"
            )
        return cls(**data)


@dataclass(frozen=True)
class HyperParams:
    optimizer: str
    epochs: int
    learning_rate: float
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        object.__setattr__(self, "optimizer", str(self.optimizer).lower())
        self.validate()

    def validate(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValidationException(f"Неизвестный оптимизатор: {self.optimizer}")
        if self.epochs < 1:
            raise ValidationException("Количество эпох должно быть не меньше 1")
        if not self.learning_rate > 0:
            raise ValidationException("Скорость обучения должна быть положительной")
        if self.batch_size < 1:
            raise ValidationException("Размер батча должен быть не меньше 1")

    @classmethod
    def default(cls, optimizer: str, epochs: int) -> "HyperParams":
        return cls(optimizer, epochs, DEFAULT_LEARNING_RATES[optimizer.lower()])

    @property
    def descriptor(self) -> str:
        return f"{self.optimizer}-{self.epochs}-lr{self.learning_rate:g}-b{self.batch_size}"

    @property
    def label(self) -> str:
        return f"{OPTIMIZER_LABELS[self.optimizer]}/{self.epochs}"

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HyperParams":
        optimizer = str(data["optimizer"]).lower()
        learning_rate = data.get("learning_rate")
        if learning_rate is None:
            learning_rate = DEFAULT_LEARNING_RATES.get(optimizer, 0.0)
        return cls(
            optimizer=optimizer,
            epochs=int(data["epochs"]),
            learning_rate=float(learning_rate),
            batch_size=int(data.get("batch_size") or DEFAULT_BATCH_SIZE),
        )


@dataclass(frozen=True)
class ClassifierSpec:
    id: str
    architecture: str
    hidden_units: int = MLP_HIDDEN_UNITS

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ClassifierSpec":
        return cls(
            id=str(data["id"]),
            architecture=str(data.get("architecture") or data["id"]),
            hidden_units=int(data.get("hidden_units") or MLP_HIDDEN_UNITS),
        )


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    loss: float

    @property
    def loss_scaled(self) -> float:
        return self.loss * LOSS_SCALE


@dataclass(frozen=True, eq=False)
class ImageSet:
    """
    Размеченные изображения: images (N, 28, 28) uint8, labels (N,) uint8.
    Массивы помечаются только для чтения.
    """

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.uint8)
        labels = np.asarray(self.labels, dtype=np.uint8)
        if images.ndim != 3 or images.shape[1:] != (IMAGE_SIZE, IMAGE_SIZE):
            raise ValidationException(
                f"Ожидались изображения {IMAGE_SIZE}x{IMAGE_SIZE}, получено {images.shape}"
            )
        if labels.shape != (images.shape[0],):
            raise ValidationException("Количество меток не совпадает с изображениями")
        if labels.size and labels.max() >= N_CLASSES:
            raise ValidationException(f"Метки должны лежать в [0, {N_CLASSES - 1}]")
        images.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def empty(cls) -> "ImageSet":
        return cls(
            np.zeros((0, IMAGE_SIZE, IMAGE_SIZE), dtype=np.uint8),
            np.zeros((0,), dtype=np.uint8),
        )

    def __len__(self):
        return int(self.labels.shape[0])

    def subset(self, indices) -> "ImageSet":
        indices = np.asarray(indices, dtype=np.int64)
        return ImageSet(self.images[indices], self.labels[indices])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=N_CLASSES)

    def same_as(self, other: "ImageSet") -> bool:
        return np.array_equal(self.images, other.images) and np.array_equal(
            self.labels, other.labels
        )


@dataclass(frozen=True, eq=False)
class DataSplit:
    train: ImageSet
    valid: ImageSet
    test: ImageSet

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.valid), len(self.test)


@dataclass(frozen=True)
class RunSpec:
    """Один запуск сетки: классификатор, гиперпараметры и вектор с выведенным сидом"""

    index: int
    classifier: ClassifierSpec
    hp_index: int
    hyperparams: HyperParams
    vector: AugVector
    seed: int

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.classifier.id, self.hyperparams.descriptor, self.vector.to_string())

    def as_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "classifier": self.classifier.as_dict(),
            "hp_index": self.hp_index,
            "hyperparams": self.hyperparams.as_dict(),
            "vector": self.vector.to_string(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunSpec":
        return cls(
            index=int(data["index"]),
            classifier=ClassifierSpec.from_dict(data["classifier"]),
            hp_index=int(data["hp_index"]),
            hyperparams=HyperParams.from_dict(data["hyperparams"]),
            vector=AugVector.from_string(data["vector"]),
            seed=int(data["seed"]),
        )


RECORD_FIELDS = (
    "classifier",
    "hyperparams",
    "optimizer",
    "epochs",
    "learning_rate",
    "batch_size",
    "vector",
    "seed",
    "status",
    "test_accuracy",
    "test_loss",
    "test_loss_scaled",
    "valid_accuracy",
    "valid_loss",
    "seconds",
    "error",
)


@dataclass(frozen=True)
class RunRecord:
    """Результат одного обученного классификатора (строка хранилища результатов)"""

    classifier: str
    hyperparams: str
    optimizer: str
    epochs: int
    learning_rate: float
    batch_size: int
    vector: str
    seed: int
    status: str
    test_accuracy: Optional[float] = None
    test_loss: Optional[float] = None
    test_loss_scaled: Optional[float] = None
    valid_accuracy: Optional[float] = None
    valid_loss: Optional[float] = None
    seconds: float = 0.0
    error: str = ""

    def __post_init__(self):
        if self.status not in RUN_STATUSES:
            raise ValidationException(f"Неизвестный статус запуска: {self.status}")
        if self.status == RUN_STATUS_DONE:
            if self.test_accuracy is None or not 0.0 <= self.test_accuracy <= 100.0:
                raise ValidationException("Точность должна лежать в [0, 100]")
            if self.test_loss is None or self.test_loss < 0:
                raise ValidationException("Лосс должен быть неотрицательным")

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.classifier, self.hyperparams, self.vector)

    @property
    def is_done(self) -> bool:
        return self.status == RUN_STATUS_DONE

    @property
    def is_failed(self) -> bool:
        return self.status == RUN_STATUS_FAILED

    def metric(self, name: str) -> float:
        if name not in METRICS:
            raise ValidationException(f"Неизвестная метрика: {name}")
        return self.test_accuracy if name == "accuracy" else self.test_loss

    def as_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in RECORD_FIELDS}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunRecord":
        return cls(**{name: data[name] for name in RECORD_FIELDS if name in data})


@dataclass
class ResultTable:
    """Записи в порядке плана; счетчики описывают последнее выполнение"""

    records: List[RunRecord] = field(default_factory=list)
    executed: int = field(default=0, compare=False)
    skipped: int = field(default=0, compare=False)

    def __iter__(self) -> Iterator[RunRecord]:
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def by_key(self) -> Dict[Tuple[str, str, str], RunRecord]:
        return {record.key: record for record in self.records}

    def done(self) -> List[RunRecord]:
        return [r for r in self.records if r.is_done]

    def failed(self) -> List[RunRecord]:
        return [r for r in self.records if r.is_failed]


@dataclass(frozen=True)
class SurrogateFit:
    classifier: str
    hyperparams: str
    metric: str
    intercept: float
    coefficients: Tuple[float, ...]
    rss: float
    n_samples: int
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.coefficients) != N_AUGMENTATIONS:
            raise ValidationException(
                f"Ожидалось {N_AUGMENTATIONS} коэффициентов, получено {len(self.coefficients)}"
            )

    @property
    def series_name(self) -> str:
        return f"{self.classifier}/{self.hyperparams}"


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    """Коэффициенты, индексированные (классификатор k, гиперпараметры l, аугментация i)"""

    values: np.ndarray
    classifier_ids: Tuple[str, ...]
    hyperparam_labels: Tuple[str, ...]
    metric: str
    normalized: bool

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        expected = (
            len(self.classifier_ids),
            len(self.hyperparam_labels),
            N_AUGMENTATIONS,
        )
        if values.shape != expected:
            raise ValidationException(
                f"Форма тензора {values.shape} не совпадает с ожидаемой {expected}"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationException("Тензор коэффициентов содержит пропуски")
        if self.normalized:
            deviation = max(
                np.abs(values.mean(axis=2)).max(initial=0.0),
                np.abs(values.std(axis=2) - 1.0).max(initial=0.0),
            )
            if deviation > NORMALIZATION_TOLERANCE:
                raise NormalizationException(
                    f"Ряды тензора не нормализованы: отклонение {deviation:.3g}"
                )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "classifier_ids", tuple(self.classifier_ids))
        object.__setattr__(self, "hyperparam_labels", tuple(self.hyperparam_labels))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.values.shape

    def series(self, k: int, l: int) -> np.ndarray:
        return self.values[k, l]


@dataclass(frozen=True)
class MetricsRow:
    augmentation: int
    per_model_variance: Tuple[float, ...]
    sensitivity: float
    consistency: float
    influence: float
    reliability_table: float
    reliability_equation: float
    sensitive: bool = False
    reliable: bool = False
    degenerate: bool = False

    @property
    def name(self) -> str:
        return AUGMENTATION_NAMES[self.augmentation]

    def reliability(self, mode: str = "table") -> float:
        return self.reliability_table if mode == "table" else self.reliability_equation
